//! Hypergraph construction and partitioning for static and adaptive quantum
//! circuits.
//!
//! The pipeline is:
//!
//! 1. [`circuit`]: parse or generate a circuit with classical control flow.
//! 2. [`builders`]: translate it into a primal (static) or extended
//!    (adaptive) [`hypergraph::Hypergraph`].
//! 3. [`partition`]: split the hypergraph across `k` QPUs with a modified
//!    Fiduccia-Mattheyses refinement (or a Kernighan-Lin baseline) and record
//!    the classical communication needed for cut conditional hyperedges.
//! 4. [`report`]: static-vs-adaptive comparison rows and benchmark sweeps.

pub mod builders;
pub mod circuit;
pub mod cli;
pub mod hypergraph;
pub mod partition;
pub mod report;

pub use builders::{build_adaptive, build_static, WeightModel};
pub use circuit::{parse_circuit, serialize_circuit, Circuit};
pub use hypergraph::Hypergraph;
pub use partition::{partition, PartitionConfig, PartitionResult};

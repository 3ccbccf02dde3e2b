//! k-way partitioning of hypergraphs across QPUs.
//!
//! The objective is the weighted connectivity cut `sum w(e) * (λ_e - 1)`
//! over active edges, traded against qubit-count overflow by the `lambda`
//! penalty, under a hard per-block capacity of `ceil(nq/k) * (1 + epsilon)`.

mod comm;
mod fm;
mod gain;
mod kl;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph, VertexKind};

pub use comm::{handle_conditional_cuts, CommRecord};
pub use fm::{fm_refine, fm_refine_from};
pub use gain::GainTable;
pub use kl::{clique_expansion, kl_partition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("cannot split {qubits} qubit(s) into {k} blocks")]
    TooFewQubits { qubits: usize, k: usize },
    #[error("Kernighan-Lin supports k = 2 only, got k = {0}")]
    UnsupportedK(usize),
    #[error("vertex {0} has no valid block assignment")]
    UnassignedVertex(usize),
    #[error("invalid partition config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heuristic {
    #[serde(rename = "FM")]
    Fm,
    #[serde(rename = "KL")]
    Kl,
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Fm => "FM",
            Heuristic::Kl => "KL",
        })
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fm" => Ok(Heuristic::Fm),
            "kl" => Ok(Heuristic::Kl),
            _ => Err(format!("unknown heuristic `{s}` (expected fm or kl)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub k: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub max_passes: usize,
    pub seed: u64,
    pub heuristic: Heuristic,
    pub comm_overhead_factor: f64,
    /// Rerun FM once with overhead-adjusted conditional weights.
    pub repartition_after_overhead: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            k: 2,
            lambda: 1.0,
            epsilon: 0.1,
            max_passes: 20,
            seed: 0,
            heuristic: Heuristic::Fm,
            comm_overhead_factor: 2.0,
            repartition_after_overhead: false,
        }
    }
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<(), PartitionError> {
        let bad = |m: String| Err(PartitionError::InvalidConfig(m));
        if self.k < 2 {
            return bad(format!("k must be >= 2, got {}", self.k));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return bad(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            ));
        }
        if self.max_passes == 0 {
            return bad("max_passes must be positive".into());
        }
        if !self.comm_overhead_factor.is_finite() || self.comm_overhead_factor < 1.0 {
            return bad(format!(
                "comm_overhead_factor must be >= 1, got {}",
                self.comm_overhead_factor
            ));
        }
        Ok(())
    }
}

/// Block id per vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub block_of: Vec<usize>,
}

impl PartitionAssignment {
    pub fn new(block_of: Vec<usize>) -> Self {
        PartitionAssignment { block_of }
    }

    pub fn block(&self, v: usize) -> usize {
        self.block_of[v]
    }

    /// Ensures every vertex of `g` has a block below `k`.
    pub fn check(&self, g: &Hypergraph, k: usize) -> Result<(), PartitionError> {
        if let Some(v) =
            (0..g.vertices.len()).find(|&v| self.block_of.get(v).is_none_or(|&b| b >= k))
        {
            return Err(PartitionError::UnassignedVertex(v));
        }
        Ok(())
    }

    /// Qubit count per block.
    pub fn block_qubits(&self, g: &Hypergraph, k: usize) -> Vec<usize> {
        let mut counts = vec![0; k];
        for v in &g.vertices {
            if v.kind == VertexKind::Qubit {
                counts[self.block_of[v.id]] += 1;
            }
        }
        counts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionResult {
    pub assignment: PartitionAssignment,
    pub cut_size: f64,
    /// Cut with cut conditional edges reweighted by the overhead factor.
    pub cut_size_with_overhead: f64,
    pub balance: f64,
    pub comm_records: Vec<CommRecord>,
    /// `(pass index, cut after pass)`; pass 0 is the starting assignment.
    pub pass_history: Vec<(usize, f64)>,
    pub moves_applied: usize,
    pub heuristic: Heuristic,
}

impl PartitionResult {
    /// JSON document with the assignment keyed by vertex label.
    pub fn to_json(&self, g: &Hypergraph) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            heuristic: Heuristic,
            assignment: BTreeMap<&'a str, usize>,
            blocks: Vec<Vec<&'a str>>,
            cut_size: f64,
            cut_size_with_overhead: f64,
            balance: f64,
            moves_applied: usize,
            pass_history: &'a [(usize, f64)],
            comm_records: &'a [CommRecord],
        }
        let k = self.assignment.block_of.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for v in &g.vertices {
            blocks[self.assignment.block_of[v.id]].push(v.label.as_str());
        }
        let doc = Doc {
            heuristic: self.heuristic,
            assignment: g
                .vertices
                .iter()
                .map(|v| (v.label.as_str(), self.assignment.block_of[v.id]))
                .collect(),
            blocks,
            cut_size: self.cut_size,
            cut_size_with_overhead: self.cut_size_with_overhead,
            balance: self.balance,
            moves_applied: self.moves_applied,
            pass_history: &self.pass_history,
            comm_records: &self.comm_records,
        };
        serde_json::to_string_pretty(&doc).expect("result serialization is infallible")
    }
}

/// Column order of [`summary_row`].
pub const SUMMARY_COLUMNS: [&str; 11] = [
    "circuit",
    "mode",
    "k",
    "lambda",
    "epsilon",
    "heuristic",
    "cut",
    "overhead_cut",
    "balance",
    "moves",
    "wall_time_ms",
];

/// CSV summary fields for one run, in [`SUMMARY_COLUMNS`] order.
pub fn summary_row(
    circuit: &str,
    mode: &str,
    cfg: &PartitionConfig,
    r: &PartitionResult,
    wall_time_ms: u128,
) -> Vec<String> {
    vec![
        circuit.to_string(),
        mode.to_string(),
        cfg.k.to_string(),
        cfg.lambda.to_string(),
        cfg.epsilon.to_string(),
        r.heuristic.to_string(),
        r.cut_size.to_string(),
        r.cut_size_with_overhead.to_string(),
        r.balance.to_string(),
        r.moves_applied.to_string(),
        wall_time_ms.to_string(),
    ]
}

/// `sum w(e) * (blocks spanned - 1)` over active edges.
pub fn compute_cut_size(g: &Hypergraph, a: &PartitionAssignment) -> Result<f64, PartitionError> {
    if let Some(v) = (0..g.vertices.len()).find(|&v| v >= a.block_of.len()) {
        return Err(PartitionError::UnassignedVertex(v));
    }
    let mut cut = 0.0;
    let mut seen = Vec::new();
    for e in g.active_edges() {
        seen.clear();
        seen.extend(e.pins.iter().map(|&p| a.block_of[p]));
        seen.sort_unstable();
        seen.dedup();
        cut += e.weight * (seen.len() - 1) as f64;
    }
    Ok(cut)
}

/// Total qubit overflow above `ceil(nq / k)` across blocks.
pub fn compute_balance(
    g: &Hypergraph,
    a: &PartitionAssignment,
    k: usize,
) -> Result<f64, PartitionError> {
    a.check(g, k)?;
    let ideal = g.num_qubits().div_ceil(k);
    Ok(a.block_qubits(g, k)
        .iter()
        .map(|&c| c.saturating_sub(ideal))
        .sum::<usize>() as f64)
}

/// Largest admissible qubit count of one block.
pub fn hard_capacity(num_qubits: usize, k: usize, epsilon: f64) -> usize {
    let cap = num_qubits.div_ceil(k) as f64 * (1.0 + epsilon);
    (cap + 1e-9).floor() as usize
}

/// Puts every classical bit in its writer's block (block 0 if unwritten).
pub fn colocate_clbits(g: &Hypergraph, a: &mut PartitionAssignment) {
    for v in &g.vertices {
        if v.kind == VertexKind::Clbit {
            a.block_of[v.id] = v.writer.map_or(0, |w| a.block_of[w]);
        }
    }
}

/// Middle cut: qubits in index order split into `k` contiguous ranges whose
/// sizes differ by at most one (larger ranges first).
pub fn initial_partition(
    g: &Hypergraph,
    cfg: &PartitionConfig,
) -> Result<PartitionAssignment, PartitionError> {
    let k = cfg.k;
    let nq = g.num_qubits();
    if k < 2 {
        return Err(PartitionError::InvalidConfig(format!(
            "k must be >= 2, got {k}"
        )));
    }
    if nq < k {
        return Err(PartitionError::TooFewQubits { qubits: nq, k });
    }
    let (base, extra) = (nq / k, nq % k);
    let mut a = PartitionAssignment::new(vec![0; g.vertices.len()]);
    let mut block = 0;
    let mut filled = 0;
    for v in g.vertices.iter().filter(|v| v.kind == VertexKind::Qubit) {
        if filled == base + usize::from(block < extra) {
            block += 1;
            filled = 0;
        }
        a.block_of[v.id] = block;
        filled += 1;
    }
    colocate_clbits(g, &mut a);
    Ok(a)
}

/// Middle cut, refinement by the configured heuristic, then conditional-cut
/// accounting.
pub fn partition(g: &Hypergraph, cfg: &PartitionConfig) -> Result<PartitionResult, PartitionError> {
    cfg.validate()?;
    let mut r = match cfg.heuristic {
        Heuristic::Fm => fm_refine(g, cfg)?,
        Heuristic::Kl => kl_partition(g, cfg)?,
    };
    if cfg.repartition_after_overhead && g.active_edges().any(|e| g.carries_condition(e)) {
        let factor = cfg.comm_overhead_factor;
        let rerun = fm::fm_with_weights(g, cfg, r.assignment.clone(), |e| {
            if g.carries_condition(e) {
                e.weight * factor
            } else {
                e.weight
            }
        })?;
        let cut = compute_cut_size(g, &rerun.assignment)?;
        if cut <= r.cut_size + 1e-9 && rerun.moves_applied > 0 {
            let pass = r.pass_history.last().map_or(0, |p| p.0) + 1;
            r.pass_history.push((pass, cut));
            r.moves_applied += rerun.moves_applied;
            r.balance = compute_balance(g, &rerun.assignment, cfg.k)?;
            r.assignment = rerun.assignment;
            r.cut_size = cut;
        }
    }
    Ok(handle_conditional_cuts(g, r, cfg))
}

/// Whether every block respects the hard capacity.
pub fn is_admissible(g: &Hypergraph, a: &PartitionAssignment, cfg: &PartitionConfig) -> bool {
    let cap = hard_capacity(g.num_qubits(), cfg.k, cfg.epsilon);
    a.block_qubits(g, cfg.k).iter().all(|&c| c <= cap)
}

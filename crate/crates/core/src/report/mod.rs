//! Static-vs-adaptive comparison rows and benchmark sweeps.
//!
//! Every row is a flat record so the same struct serializes to CSV (fixed
//! column order, see [`ComparisonRow`]) and to JSON lines.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builders::{build_adaptive, build_static, BuildError, WeightModel};
use crate::circuit::generators::{Family, GeneratorSpec};
use crate::circuit::{compute_layering, flatten, Circuit, FlatOp};
use crate::hypergraph::Hypergraph;
use crate::partition::{partition, PartitionConfig};

/// Version of the row schema below; bump on any column change.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const MODE_STATIC: &str = "static";
pub const MODE_ADAPTIVE: &str = "adaptive";

pub const STATUS_OK: &str = "ok";
pub const STATUS_SKIPPED: &str = "skipped";
pub const STATUS_ERROR: &str = "error";

/// One circuit in one mode. Field order is the CSV column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Benchmark family, or `file` for a single circuit.
    pub suite: String,
    pub size: usize,
    pub circuit: String,
    pub num_qubits: usize,
    pub mode: String,
    pub status: String,
    pub estimated_depth: usize,
    pub total_gates: usize,
    pub active_edges: usize,
    /// Distinct edge kinds among stored edges (absorbed ones included).
    pub edge_kinds: usize,
    pub standard_edges: usize,
    pub conditional_edges: usize,
    pub measurement_edges: usize,
    pub super_group_edges: usize,
    pub total_edge_weight: f64,
    pub cut_size: f64,
    pub cut_size_with_overhead: f64,
    pub balance: f64,
    pub heuristic: String,
    pub k: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub runtime_ms: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOptions {
    /// Record wall-clock time; off by default so output is reproducible.
    pub timing: bool,
    /// Multiplier for gates inside `while` bodies in `total_gates`.
    pub expected_iterations: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            timing: false,
            expected_iterations: 1,
        }
    }
}

/// Gate instances after unrolling `for`; each enclosing `while` multiplies
/// by `expected_iterations`.
pub fn total_gates(c: &Circuit, expected_iterations: usize) -> usize {
    flatten(c, true)
        .iter()
        .filter(|e| matches!(e.op, FlatOp::Gate(_)))
        .map(|e| expected_iterations.pow(e.whiles.len() as u32))
        .sum()
}

fn base_row(c: &Circuit, mode: &str, cfg: &PartitionConfig, opts: &ReportOptions) -> ComparisonRow {
    ComparisonRow {
        suite: "file".into(),
        size: c.num_qubits,
        circuit: c.name.clone(),
        num_qubits: c.num_qubits,
        mode: mode.into(),
        status: STATUS_OK.into(),
        estimated_depth: compute_layering(c).depth,
        total_gates: total_gates(c, opts.expected_iterations),
        heuristic: cfg.heuristic.to_string(),
        k: cfg.k,
        lambda: cfg.lambda,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        ..ComparisonRow::default()
    }
}

fn fill(
    row: &mut ComparisonRow,
    built: Result<Hypergraph, BuildError>,
    cfg: &PartitionConfig,
    opts: &ReportOptions,
    start: Instant,
) {
    let g = match built {
        Ok(g) => g,
        Err(e @ BuildError::AdaptiveConstructInStaticMode { .. }) => {
            row.status = STATUS_SKIPPED.into();
            row.error = e.to_string();
            return;
        }
        Err(e) => {
            row.status = STATUS_ERROR.into();
            row.error = e.to_string();
            return;
        }
    };
    let stats = g.stats();
    let kind = |name: &str| stats.edges_by_kind.get(name).copied().unwrap_or(0);
    row.active_edges = stats.num_edges;
    row.edge_kinds = stats.stored_kinds.len();
    row.standard_edges = kind("standard");
    row.conditional_edges = kind("conditional");
    row.measurement_edges = kind("measurement");
    row.super_group_edges = kind("super_group");
    row.total_edge_weight = stats.total_weight;
    match partition(&g, cfg) {
        Ok(r) => {
            row.cut_size = r.cut_size;
            row.cut_size_with_overhead = r.cut_size_with_overhead;
            row.balance = r.balance;
        }
        Err(e) => {
            row.status = STATUS_ERROR.into();
            row.error = e.to_string();
        }
    }
    if opts.timing {
        row.runtime_ms = start.elapsed().as_millis() as u64;
    }
}

/// Static row (skipped when the circuit has `if`/`while`) and adaptive row
/// with grouping, each partitioned under `cfg`.
pub fn compare(
    c: &Circuit,
    wm: &WeightModel,
    cfg: &PartitionConfig,
    opts: &ReportOptions,
) -> [ComparisonRow; 2] {
    let mut stat = base_row(c, MODE_STATIC, cfg, opts);
    let start = Instant::now();
    fill(&mut stat, build_static(c, wm), cfg, opts, start);
    let mut adap = base_row(c, MODE_ADAPTIVE, cfg, opts);
    let start = Instant::now();
    fill(&mut adap, build_adaptive(c, wm, true), cfg, opts, start);
    [stat, adap]
}

/// Specs for a family ladder; the random family gets one spec per seed.
pub fn suite_specs(family: Family, sizes: &[usize], seeds: &[u64]) -> Vec<GeneratorSpec> {
    let mut out = Vec::new();
    for &size in sizes {
        if family == Family::Random {
            out.extend(seeds.iter().map(|&s| family.at_size(size, s)));
        } else {
            out.push(family.at_size(size, 0));
        }
    }
    out
}

fn mode_rank(mode: &str) -> u8 {
    u8::from(mode != MODE_STATIC)
}

/// Two rows per spec, computed in parallel and ordered by suite, size,
/// circuit, mode (static first). Generator failures become error rows.
pub fn sweep(
    specs: &[GeneratorSpec],
    wm: &WeightModel,
    cfg: &PartitionConfig,
    opts: &ReportOptions,
) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = specs
        .par_iter()
        .flat_map_iter(|spec| {
            let suite = spec.family().name().to_string();
            let mut rows = match spec.build() {
                Ok(c) => compare(&c, wm, cfg, opts).to_vec(),
                Err(e) => vec![ComparisonRow {
                    circuit: spec.to_string(),
                    mode: MODE_ADAPTIVE.into(),
                    status: STATUS_ERROR.into(),
                    error: e.to_string(),
                    heuristic: cfg.heuristic.to_string(),
                    k: cfg.k,
                    lambda: cfg.lambda,
                    epsilon: cfg.epsilon,
                    seed: cfg.seed,
                    ..ComparisonRow::default()
                }],
            };
            for r in &mut rows {
                r.circuit = spec.to_string();
                r.suite = suite.clone();
                r.size = spec.size();
            }
            rows
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.suite, a.size, &a.circuit, mode_rank(&a.mode)).cmp(&(
            &b.suite,
            b.size,
            &b.circuit,
            mode_rank(&b.mode),
        ))
    });
    rows
}

pub fn rows_to_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(csv_columns()).expect("in-memory csv write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ComparisonRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

pub fn rows_to_jsonl(rows: &[ComparisonRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("row serialization is infallible") + "\n")
        .collect()
}

/// CSV header in column order.
pub fn csv_columns() -> Vec<String> {
    let text = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(ComparisonRow::default())
            .expect("in-memory csv write");
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    };
    text.lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_string)
        .collect()
}

//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own metric or scheduling code.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use hypaq::circuit::{Block, Circuit, FlatEntry, FlatOp, Statement};
use hypaq::hypergraph::{HyperedgeKind, Hypergraph, Mode, VertexKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("corpus")
}

pub fn corpus_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

pub fn corpus() -> Vec<(String, Circuit)> {
    let mut names: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".qc"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let c = hypaq::parse_circuit(&corpus_file(&n)).unwrap();
            (n, c)
        })
        .collect()
}

/// Cut of an assignment, computed from pins and weights alone.
pub fn oracle_cut(g: &Hypergraph, block_of: &[usize]) -> f64 {
    g.edges
        .iter()
        .filter(|e| e.absorbed_by.is_none())
        .map(|e| {
            let blocks: BTreeSet<usize> = e.pins.iter().map(|&p| block_of[p]).collect();
            e.weight * (blocks.len() as f64 - 1.0)
        })
        .sum()
}

pub fn oracle_qubit_counts(g: &Hypergraph, block_of: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for v in &g.vertices {
        if v.kind == VertexKind::Qubit {
            counts[block_of[v.id]] += 1;
        }
    }
    counts
}

pub fn oracle_capacity(nq: usize, k: usize, epsilon: f64) -> f64 {
    nq.div_ceil(k) as f64 * (1.0 + epsilon)
}

/// Minimum cut over every assignment of vertices to `k` blocks whose qubit
/// counts respect the capacity. Returns the cut and all optimal assignments.
pub fn brute_force(g: &Hypergraph, k: usize, epsilon: f64, lambda: f64) -> (f64, Vec<Vec<usize>>) {
    let n = g.vertices.len();
    assert!(n <= 16, "brute force limited to small graphs");
    let nq = g
        .vertices
        .iter()
        .filter(|v| v.kind == VertexKind::Qubit)
        .count();
    let cap = oracle_capacity(nq, k, epsilon);
    let ideal = nq.div_ceil(k);
    let total = k.pow(n as u32);
    let mut best = f64::INFINITY;
    let mut optimal = Vec::new();
    let mut block_of = vec![0; n];
    for code in 0..total {
        let mut x = code;
        for b in block_of.iter_mut() {
            *b = x % k;
            x /= k;
        }
        let counts = oracle_qubit_counts(g, &block_of, k);
        if counts.iter().any(|&c| c as f64 > cap + 1e-9) {
            continue;
        }
        let balance: usize = counts.iter().map(|&c| c.saturating_sub(ideal)).sum();
        let obj = oracle_cut(g, &block_of) + lambda * balance as f64;
        if obj < best - 1e-12 {
            best = obj;
            optimal.clear();
        }
        if (obj - best).abs() <= 1e-12 {
            optimal.push(block_of.clone());
        }
    }
    (best, optimal)
}

/// Random qubit-only or mixed hypergraph with at most `max_vertices`
/// vertices.
pub fn random_hypergraph(seed: u64, max_vertices: usize) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extended = rng.gen_bool(0.4);
    let mut g = Hypergraph::new(if extended {
        Mode::Extended
    } else {
        Mode::Primal
    });
    let nq = rng.gen_range(2..=max_vertices.min(10));
    for i in 0..nq {
        g.add_vertex(VertexKind::Qubit, format!("q{i}")).unwrap();
    }
    if extended {
        let nc = rng.gen_range(0..=(max_vertices - nq).min(3));
        for i in 0..nc {
            let v = g.add_vertex(VertexKind::Clbit, format!("c[{i}]")).unwrap();
            let writer = rng.gen_range(0..nq);
            g.set_writer(v, writer).unwrap();
        }
    }
    let n = g.vertices.len();
    let m = rng.gen_range(1..=2 * n);
    let weights = [0.25, 0.5, 1.0, 1.0, 2.0, 3.0];
    for _ in 0..m {
        let p = rng.gen_range(2..=4.min(n));
        let mut pins = BTreeSet::new();
        while pins.len() < p {
            pins.insert(rng.gen_range(0..n));
        }
        let pins: Vec<usize> = pins.into_iter().collect();
        let w = weights[rng.gen_range(0..weights.len())];
        let kind = if extended && rng.gen_bool(0.3) {
            HyperedgeKind::Measurement
        } else {
            HyperedgeKind::Standard
        };
        g.add_edge(&pins, w, kind, vec![]).unwrap();
    }
    g
}

/// Parsed hMETIS document: edge weights, edge pins (0-based), vertex weights.
pub struct Hmetis {
    pub edge_weights: Vec<i64>,
    pub edges: Vec<Vec<usize>>,
    pub vertex_weights: Vec<i64>,
}

pub fn read_hmetis(text: &str) -> Hmetis {
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let header: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(header.len(), 3);
    assert_eq!(header[2], 11);
    let (m, n) = (header[0], header[1]);
    let mut out = Hmetis {
        edge_weights: Vec::new(),
        edges: Vec::new(),
        vertex_weights: Vec::new(),
    };
    for _ in 0..m {
        let nums: Vec<i64> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        out.edge_weights.push(nums[0]);
        out.edges
            .push(nums[1..].iter().map(|&p| (p - 1) as usize).collect());
    }
    for _ in 0..n {
        out.vertex_weights
            .push(lines.next().unwrap().trim().parse().unwrap());
    }
    assert!(lines.next().is_none());
    out
}

/// Multi-qubit gate instances with `for` bodies repeated, `while` bodies
/// once, walking the statement tree directly.
pub fn walker_multi_qubit_gates(body: &[Statement]) -> usize {
    let mut n = 0;
    for s in body {
        match s {
            Statement::Gate(g) if g.qubits.len() >= 2 => n += 1,
            Statement::Block(Block::For { count, body, .. }) => {
                n += *count as usize * walker_multi_qubit_gates(body)
            }
            Statement::Block(Block::If {
                then_body,
                else_body,
                ..
            }) => n += walker_multi_qubit_gates(then_body) + walker_multi_qubit_gates(else_body),
            Statement::Block(Block::While { body, .. }) => n += walker_multi_qubit_gates(body),
            _ => {}
        }
    }
    n
}

/// Gate instances of any arity, counted the same way.
pub fn walker_gates(body: &[Statement]) -> usize {
    let mut n = 0;
    for s in body {
        match s {
            Statement::Gate(_) => n += 1,
            Statement::Block(Block::For { count, body, .. }) => {
                n += *count as usize * walker_gates(body)
            }
            Statement::Block(Block::If {
                then_body,
                else_body,
                ..
            }) => n += walker_gates(then_body) + walker_gates(else_body),
            Statement::Block(Block::While { body, .. }) => n += walker_gates(body),
            _ => {}
        }
    }
    n
}

fn writes(e: &FlatEntry) -> Option<usize> {
    match &e.op {
        FlatOp::Measure(m) => Some(m.clbit.0),
        _ => None,
    }
}

fn reads(e: &FlatEntry) -> BTreeSet<usize> {
    e.guards
        .iter()
        .flat_map(|c| c.clbits())
        .map(|b| b.0)
        .collect()
}

fn qubits_of(e: &FlatEntry) -> BTreeSet<usize> {
    match &e.op {
        FlatOp::Gate(g) => g.qubits.iter().map(|q| q.0).collect(),
        FlatOp::Measure(m) => [m.qubit.0].into(),
        FlatOp::Reset(r) => [r.qubit.0].into(),
    }
}

/// Whether entry `j` must follow entry `i < j`.
pub fn depends(a: &FlatEntry, b: &FlatEntry) -> bool {
    if !qubits_of(a).is_disjoint(&qubits_of(b)) {
        return true;
    }
    let (wa, wb) = (writes(a), writes(b));
    if let Some(w) = wa {
        if wb == Some(w) || reads(b).contains(&w) {
            return true;
        }
    }
    if let Some(w) = wb {
        if reads(a).contains(&w) {
            return true;
        }
    }
    false
}

/// ASAP layers from the pairwise dependency relation (quadratic).
pub fn oracle_layers(entries: &[FlatEntry]) -> Vec<usize> {
    let mut layer = vec![0; entries.len()];
    for j in 0..entries.len() {
        for i in 0..j {
            if depends(&entries[i], &entries[j]) {
                layer[j] = layer[j].max(layer[i] + 1);
            }
        }
    }
    layer
}

/// Per flattened measurement, how many later entries have a guard reading
/// its bit. Loops are ignored, so only use on loop-free circuits.
pub fn forward_scan_dependents(entries: &[FlatEntry]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        if let Some(b) = writes(e) {
            let n = entries[i + 1..]
                .iter()
                .filter(|x| reads(x).contains(&b))
                .count();
            out.push((i, n));
        }
    }
    out
}

/// Runs the built `hypaq` binary.
pub fn run_cli(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_hypaq"))
        .args(args)
        .env_remove("HYPAQ_CONFIG")
        .output()
        .unwrap()
}

/// One invocation of every subcommand writing to `<name>` in `dir`, as
/// (output file name, arguments without `-o`).
pub fn cli_invocations() -> Vec<(&'static str, Vec<String>)> {
    let f = |n: &str| corpus_dir().join(n).display().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("parse.json", s(&["parse", &f("repeat_until.qc")])),
        (
            "generate.qc",
            s(&["generate", "random(n=6,depth=12,seed=9)"]),
        ),
        ("graph.json", s(&["hypergraph", &f("repeat_until.qc")])),
        (
            "graph.hgr",
            s(&["hypergraph", &f("repeat_until.qc"), "--format", "hmetis"]),
        ),
        (
            "graph.csv",
            s(&["hypergraph", "rus(n=8)", "--format", "incidence"]),
        ),
        (
            "part.json",
            s(&[
                "partition",
                &f("cond_gate.qc"),
                "-k",
                "2",
                "--epsilon",
                "0.5",
                "--seed",
                "3",
            ]),
        ),
        (
            "part_kl.csv",
            s(&[
                "partition",
                "qpe(n=6)",
                "--heuristic",
                "KL",
                "--format",
                "csv",
            ]),
        ),
        ("compare.csv", s(&["compare", &f("repeat_until.qc")])),
        (
            "sweep.csv",
            s(&[
                "sweep",
                "--suite",
                "rus,random",
                "--sizes",
                "4:12:4",
                "--seeds",
                "0:2",
            ]),
        ),
        (
            "sweep.jsonl",
            s(&[
                "sweep", "--suite", "iqpe", "--sizes", "2:6", "--format", "jsonl",
            ]),
        ),
    ]
}

/// Small hypergraphs for exhaustive comparison: 200 random graphs, small
/// random adaptive circuits and the hand-written circuits.
pub fn partition_corpus() -> Vec<Hypergraph> {
    use hypaq::builders::{build_adaptive, WeightModel};
    let mut out: Vec<Hypergraph> = (0..200).map(|s| random_hypergraph(s, 12)).collect();
    for seed in 0..60 {
        let c = hypaq::circuit::generators::gen_random_adaptive(2 + (seed as usize % 5), 6, seed)
            .unwrap();
        let g = build_adaptive(&c, &WeightModel::default(), seed % 2 == 0).unwrap();
        if g.vertices.len() <= 12 {
            out.push(g);
        }
    }
    for name in ["path3.qc", "cond_gate.qc", "repeat_until.qc"] {
        let c = hypaq::parse_circuit(&corpus_file(name)).unwrap();
        out.push(build_adaptive(&c, &WeightModel::default(), true).unwrap());
    }
    out
}

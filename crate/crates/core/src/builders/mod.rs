//! Circuit to hypergraph translation.
//!
//! [`build_static`] produces the primal hypergraph of a static circuit: one
//! vertex per qubit and one standard hyperedge per multi-qubit gate.
//! [`build_adaptive`] produces the extended hypergraph of an adaptive
//! circuit, adding classical-bit vertices, conditional hyperedges for guarded
//! gates, measurement hyperedges for measurements that later conditions
//! read, and (optionally) one super-group hyperedge per outermost
//! control-flow block.

mod weights;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::circuit::{
    flatten, layer_entries, Block, Circuit, CircuitError, FlatEntry, FlatOp, SourceLine, Statement,
};
use crate::hypergraph::{HyperedgeKind, Hypergraph, HypergraphError, Mode, VertexKind};

pub use weights::{
    estimate_condition_probability, normalize_pattern, parse_key_values, MeasurementImpact,
    WeightModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("`{construct}` block at {line} is adaptive; static mode accepts only gates, measurements, resets and for loops")]
    AdaptiveConstructInStaticMode { construct: String, line: SourceLine },
    #[error(transparent)]
    Invalid(#[from] CircuitError),
    #[error(transparent)]
    Graph(#[from] HypergraphError),
    #[error("weight model config line {line}: {message}")]
    Config { line: usize, message: String },
}

fn find_adaptive(body: &[Statement]) -> Option<&Block> {
    for stmt in body {
        if let Statement::Block(block) = stmt {
            match block {
                Block::For { body, .. } => {
                    if let Some(b) = find_adaptive(body) {
                        return Some(b);
                    }
                }
                other => return Some(other),
            }
        }
    }
    None
}

fn add_qubits(g: &mut Hypergraph, c: &Circuit) -> Result<(), BuildError> {
    for q in 0..c.num_qubits {
        g.add_vertex(VertexKind::Qubit, format!("q{q}"))?;
    }
    Ok(())
}

fn record_info(g: &mut Hypergraph, c: &Circuit, entries: &[FlatEntry]) {
    g.info.source = c.name.clone();
    for e in entries {
        match &e.op {
            FlatOp::Gate(gate) if gate.arity() < 2 => g.info.single_qubit_gates += 1,
            FlatOp::Reset(_) => g.info.resets += 1,
            FlatOp::Measure(_) => g.info.measurements += 1,
            FlatOp::Gate(_) => {}
        }
    }
}

/// Primal hypergraph of a static circuit. `for` loops are unrolled;
/// single-qubit gates, measurements and resets produce no edge.
pub fn build_static(c: &Circuit, wm: &WeightModel) -> Result<Hypergraph, BuildError> {
    c.validate()?;
    wm.validate()?;
    if let Some(block) = find_adaptive(&c.body) {
        return Err(BuildError::AdaptiveConstructInStaticMode {
            construct: block.keyword().to_string(),
            line: block.line(),
        });
    }
    build_condition_blind(c, wm)
}

/// Primal hypergraph that ignores classical control: every multi-qubit gate
/// becomes a standard edge at full weight, `while` bodies counted once.
/// This is how a static partitioner sees an adaptive circuit.
pub fn build_condition_blind(c: &Circuit, wm: &WeightModel) -> Result<Hypergraph, BuildError> {
    c.validate()?;
    wm.validate()?;
    let entries = flatten(c, true);
    let layering = layer_entries(&entries);
    let mut g = Hypergraph::new(Mode::Primal);
    add_qubits(&mut g, c)?;
    record_info(&mut g, c, &entries);
    for layer in &layering.layers {
        for &i in layer {
            if let FlatOp::Gate(gate) = &entries[i].op {
                if gate.arity() >= 2 {
                    let pins: Vec<usize> = gate.qubits.iter().map(|q| q.0).collect();
                    let id = g.add_edge(
                        &pins,
                        wm.base_weight(gate.arity()),
                        HyperedgeKind::Standard,
                        vec![entries[i].origin_label()],
                    )?;
                    g.edges[id].layer = Some(layering.layer_of[i]);
                }
            }
        }
    }
    Ok(g)
}

/// For each measurement entry, the number of statements whose guards read
/// the written bit afterwards: later in program order, or earlier in the
/// body of an enclosing `while` whose condition reads the bit (the next
/// iteration).
pub fn dependent_counts(entries: &[FlatEntry]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (i, entry) in entries.iter().enumerate() {
        let Some(bit) = entry.written_clbit() else {
            continue;
        };
        let loops: BTreeSet<usize> = entry
            .whiles
            .iter()
            .filter(|w| w.cond.clbits().iter().any(|b| b.0 == bit))
            .map(|w| w.instance)
            .collect();
        let count = entries
            .iter()
            .enumerate()
            .filter(|&(j, other)| {
                j != i
                    && other.read_clbits().contains(&bit)
                    && (j > i || other.whiles.iter().any(|w| loops.contains(&w.instance)))
            })
            .count();
        out.insert(i, count);
    }
    out
}

/// Extended hypergraph of an adaptive circuit.
///
/// Entries are visited layer by layer (gates before measurements within a
/// layer). Guarded gates of any arity become conditional edges pinned to
/// their qubits and the bits of their innermost condition, weighted
/// `base * probability`. Measurements whose bit is read later become
/// measurement edges on `{qubit, bit}`. With `grouping`, the edges of each
/// outermost control-flow block are folded into one super-group edge.
pub fn build_adaptive(
    c: &Circuit,
    wm: &WeightModel,
    grouping: bool,
) -> Result<Hypergraph, BuildError> {
    c.validate()?;
    wm.validate()?;
    let entries = flatten(c, true);
    let layering = layer_entries(&entries);
    let mut g = Hypergraph::new(Mode::Extended);
    add_qubits(&mut g, c)?;
    record_info(&mut g, c, &entries);

    let mut used: BTreeSet<usize> = BTreeSet::new();
    for e in &entries {
        used.extend(e.written_clbit());
        used.extend(e.read_clbits());
    }
    let mut clbit_vertex = BTreeMap::new();
    for &b in &used {
        let id = g.add_vertex(
            VertexKind::Clbit,
            c.clbit_label(crate::circuit::ClbitRef(b)),
        )?;
        clbit_vertex.insert(b, id);
    }
    for e in &entries {
        if let FlatOp::Measure(m) = &e.op {
            g.set_writer(clbit_vertex[&m.clbit.0], m.qubit.0)?;
        }
    }

    let dependents = dependent_counts(&entries);
    let mut group_members: BTreeMap<usize, (crate::circuit::GroupId, Vec<usize>)> = BTreeMap::new();

    for layer in &layering.layers {
        let gates = layer
            .iter()
            .filter(|&&i| matches!(entries[i].op, FlatOp::Gate(_)));
        let measures = layer
            .iter()
            .filter(|&&i| matches!(entries[i].op, FlatOp::Measure(_)));
        for &i in gates.chain(measures) {
            let entry = &entries[i];
            let origin = vec![entry.origin_label()];
            let edge = match &entry.op {
                FlatOp::Gate(gate) => {
                    let mut pins: Vec<usize> = gate.qubits.iter().map(|q| q.0).collect();
                    let base = wm.base_weight(gate.arity());
                    match &entry.path_condition {
                        Some(cond) => {
                            pins.extend(cond.clbits().iter().map(|b| clbit_vertex[&b.0]));
                            let probability = estimate_condition_probability(cond, c, wm);
                            let mut weight = base * probability;
                            if !entry.whiles.is_empty() {
                                weight *= wm.while_multiplier;
                            }
                            let kind = HyperedgeKind::Conditional {
                                condition: cond.clone(),
                                condition_label: c.condition_text(cond),
                                probability,
                            };
                            Some(g.add_edge(&pins, weight, kind, origin)?)
                        }
                        None if gate.arity() >= 2 => {
                            Some(g.add_edge(&pins, base, HyperedgeKind::Standard, origin)?)
                        }
                        None => None,
                    }
                }
                FlatOp::Measure(m) => {
                    let count = dependents[&i];
                    if count == 0 {
                        None
                    } else {
                        let weight = match wm.measurement_impact {
                            MeasurementImpact::DependentGateCount => count as f64,
                            MeasurementImpact::Constant(w) => w,
                        };
                        let pins = [m.qubit.0, clbit_vertex[&m.clbit.0]];
                        Some(g.add_edge(&pins, weight, HyperedgeKind::Measurement, origin)?)
                    }
                }
                FlatOp::Reset(_) => None,
            };
            if let Some(id) = edge {
                g.edges[id].layer = Some(layering.layer_of[i]);
                if let Some(group) = entry.group {
                    group_members
                        .entry(group.index)
                        .or_insert_with(|| (group, Vec::new()))
                        .1
                        .push(id);
                }
            }
        }
    }

    if grouping {
        for (group, members) in group_members.into_values() {
            g.add_super_group(&members, group.label())?;
        }
    }
    Ok(g)
}

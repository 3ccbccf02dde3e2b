//! ASAP layering over the unrolled statement stream.

use std::collections::HashMap;

use serde::Serialize;

use super::{flatten, Circuit, FlatEntry};

/// Statements grouped into time steps. Indices refer to
/// `flatten(c, true)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layering {
    pub layers: Vec<Vec<usize>>,
    pub layer_of: Vec<usize>,
    pub depth: usize,
}

/// Places each entry one step after the latest earlier entry it conflicts
/// with. Two entries conflict when they share a qubit, or when one writes a
/// classical bit the other reads or writes. Guard reads from enclosing
/// `if`/`while` blocks count as reads.
pub fn layer_entries(entries: &[FlatEntry]) -> Layering {
    let mut qubit_ready: HashMap<usize, usize> = HashMap::new();
    let mut last_write: HashMap<usize, usize> = HashMap::new();
    let mut last_read: HashMap<usize, usize> = HashMap::new();
    let mut layer_of = Vec::with_capacity(entries.len());

    for entry in entries {
        let qubits = entry.qubits();
        let reads = entry.read_clbits();
        let write = entry.written_clbit();

        let mut layer = 0;
        for q in &qubits {
            if let Some(&l) = qubit_ready.get(q) {
                layer = layer.max(l);
            }
        }
        for b in reads.iter().chain(write.iter()) {
            if let Some(&l) = last_write.get(b) {
                layer = layer.max(l);
            }
        }
        if let Some(b) = write {
            if let Some(&l) = last_read.get(&b) {
                layer = layer.max(l);
            }
        }

        // `layer` is the first free step; record as next-free = layer + 1.
        for q in qubits {
            qubit_ready.insert(q, layer + 1);
        }
        for b in reads {
            let slot = last_read.entry(b).or_insert(0);
            *slot = (*slot).max(layer + 1);
        }
        if let Some(b) = write {
            last_write.insert(b, layer + 1);
        }
        layer_of.push(layer);
    }

    let depth = layer_of.iter().map(|l| l + 1).max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for (i, &l) in layer_of.iter().enumerate() {
        layers[l].push(i);
    }
    Layering {
        layers,
        layer_of,
        depth,
    }
}

pub fn compute_layering(c: &Circuit) -> Layering {
    layer_entries(&flatten(c, true))
}

use crate::hypergraph::{Hypergraph, VertexKind};

use super::PartitionAssignment;

/// Incremental move-evaluation state: per-edge pin counts per block, block
/// qubit counts, and a cached cut gain for every (vertex, block) pair.
///
/// The cut gain of moving `v` to `b` is the decrease in connectivity cut;
/// the balance delta is the increase in total overflow. Both follow the
/// definitions of [`super::compute_cut_size`] and [`super::compute_balance`].
#[derive(Clone, Debug)]
pub struct GainTable {
    k: usize,
    ideal: usize,
    block_of: Vec<usize>,
    is_qubit: Vec<bool>,
    /// Active edges as (weight, pins).
    edges: Vec<(f64, Vec<usize>)>,
    incident: Vec<Vec<usize>>,
    pin_counts: Vec<Vec<usize>>,
    block_qubits: Vec<usize>,
    cut_gain: Vec<Vec<f64>>,
}

impl GainTable {
    pub fn new(g: &Hypergraph, a: &PartitionAssignment, k: usize) -> GainTable {
        GainTable::with_weights(g, a, k, |e| e.weight)
    }

    pub(crate) fn with_weights(
        g: &Hypergraph,
        a: &PartitionAssignment,
        k: usize,
        weight: impl Fn(&crate::hypergraph::Hyperedge) -> f64,
    ) -> GainTable {
        let n = g.vertices.len();
        let is_qubit: Vec<bool> = g
            .vertices
            .iter()
            .map(|v| v.kind == VertexKind::Qubit)
            .collect();
        let nq = is_qubit.iter().filter(|&&q| q).count();
        let edges: Vec<(f64, Vec<usize>)> = g
            .active_edges()
            .map(|e| (weight(e), e.pins.clone()))
            .collect();
        let mut incident = vec![Vec::new(); n];
        let mut pin_counts = vec![vec![0; k]; edges.len()];
        for (i, (_, pins)) in edges.iter().enumerate() {
            for &p in pins {
                incident[p].push(i);
                pin_counts[i][a.block_of[p]] += 1;
            }
        }
        let mut block_qubits = vec![0; k];
        for v in 0..n {
            if is_qubit[v] {
                block_qubits[a.block_of[v]] += 1;
            }
        }
        let mut t = GainTable {
            k,
            ideal: nq.div_ceil(k),
            block_of: a.block_of.clone(),
            is_qubit,
            edges,
            incident,
            pin_counts,
            block_qubits,
            cut_gain: vec![vec![0.0; k]; n],
        };
        for v in 0..n {
            t.refresh(v);
        }
        t
    }

    fn refresh(&mut self, v: usize) {
        let cur = self.block_of[v];
        for b in 0..self.k {
            let mut gain = 0.0;
            if b != cur {
                for &e in &self.incident[v] {
                    let counts = &self.pin_counts[e];
                    let leaves = counts[cur] == 1;
                    let enters = counts[b] == 0;
                    if leaves && !enters {
                        gain += self.edges[e].0;
                    } else if enters && !leaves {
                        gain -= self.edges[e].0;
                    }
                }
            }
            self.cut_gain[v][b] = gain;
        }
    }

    fn overflow(&self, count: usize) -> usize {
        count.saturating_sub(self.ideal)
    }

    pub fn num_vertices(&self) -> usize {
        self.block_of.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    pub fn is_qubit(&self, v: usize) -> bool {
        self.is_qubit[v]
    }

    pub fn block_qubits(&self) -> &[usize] {
        &self.block_qubits
    }

    /// Decrease in cut size if `v` moves to `b`.
    pub fn cut_gain(&self, v: usize, b: usize) -> f64 {
        self.cut_gain[v][b]
    }

    /// Increase in total overflow if `v` moves to `b`.
    pub fn balance_delta(&self, v: usize, b: usize) -> i64 {
        let cur = self.block_of[v];
        if !self.is_qubit[v] || b == cur {
            return 0;
        }
        let (src, dst) = (self.block_qubits[cur], self.block_qubits[b]);
        let after = self.overflow(dst + 1) + self.overflow(src - 1);
        let before = self.overflow(dst) + self.overflow(src);
        after as i64 - before as i64
    }

    /// `cut_gain - lambda * balance_delta`; positive means improvement.
    pub fn gain(&self, v: usize, b: usize, lambda: f64) -> f64 {
        self.cut_gain(v, b) - lambda * self.balance_delta(v, b) as f64
    }

    /// Qubit count of `b` after moving `v` there.
    pub fn target_qubits(&self, v: usize, b: usize) -> usize {
        self.block_qubits[b] + usize::from(self.is_qubit[v] && self.block_of[v] != b)
    }

    pub fn balance(&self) -> usize {
        self.block_qubits.iter().map(|&c| self.overflow(c)).sum()
    }

    pub fn cut(&self) -> f64 {
        self.pin_counts
            .iter()
            .zip(&self.edges)
            .map(|(counts, (w, _))| {
                let spanned = counts.iter().filter(|&&c| c > 0).count();
                w * spanned.saturating_sub(1) as f64
            })
            .sum()
    }

    pub fn apply_move(&mut self, v: usize, b: usize) {
        let cur = self.block_of[v];
        if cur == b {
            return;
        }
        let mut touched = vec![v];
        for &e in &self.incident[v] {
            self.pin_counts[e][cur] -= 1;
            self.pin_counts[e][b] += 1;
            touched.extend_from_slice(&self.edges[e].1);
        }
        if self.is_qubit[v] {
            self.block_qubits[cur] -= 1;
            self.block_qubits[b] += 1;
        }
        self.block_of[v] = b;
        touched.sort_unstable();
        touched.dedup();
        for u in touched {
            self.refresh(u);
        }
    }

    pub fn assignment(&self) -> PartitionAssignment {
        PartitionAssignment::new(self.block_of.clone())
    }
}

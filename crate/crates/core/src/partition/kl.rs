use crate::hypergraph::{Hypergraph, VertexKind};

use super::{
    colocate_clbits, compute_balance, compute_cut_size, initial_partition, Heuristic,
    PartitionConfig, PartitionError, PartitionResult,
};

const EPS: f64 = 1e-9;

/// Net-to-clique expansion: each active edge with `p >= 2` pins adds
/// `w / (p - 1)` to every pin pair. Returns a dense symmetric matrix.
pub fn clique_expansion(g: &Hypergraph) -> Vec<Vec<f64>> {
    let n = g.vertices.len();
    let mut c = vec![vec![0.0; n]; n];
    for e in g.active_edges() {
        let p = e.pins.len();
        if p < 2 {
            continue;
        }
        let w = e.weight / (p - 1) as f64;
        for (i, &a) in e.pins.iter().enumerate() {
            for &b in &e.pins[i + 1..] {
                c[a][b] += w;
                c[b][a] += w;
            }
        }
    }
    c
}

/// Kernighan-Lin bisection over qubit vertices on the clique expansion.
/// Classical bits stay with their writer's block. Reported cuts use the
/// hypergraph metric; a pass that would raise it is discarded.
pub fn kl_partition(
    g: &Hypergraph,
    cfg: &PartitionConfig,
) -> Result<PartitionResult, PartitionError> {
    cfg.validate()?;
    if cfg.k != 2 {
        return Err(PartitionError::UnsupportedK(cfg.k));
    }
    let mut a = initial_partition(g, cfg)?;
    let c = clique_expansion(g);
    let qubits: Vec<usize> = g
        .vertices
        .iter()
        .filter(|v| v.kind == VertexKind::Qubit)
        .map(|v| v.id)
        .collect();
    let n = g.vertices.len();
    let mut cut = compute_cut_size(g, &a)?;
    let mut pass_history = vec![(0, cut)];
    let mut moves_applied = 0;

    for pass in 1..=cfg.max_passes {
        let mut side = a.block_of.clone();
        let mut d = vec![0.0; n];
        for &v in &qubits {
            for u in 0..n {
                if u != v {
                    d[v] += if side[u] == side[v] {
                        -c[v][u]
                    } else {
                        c[v][u]
                    };
                }
            }
        }
        let mut locked = vec![false; n];
        let mut swaps = Vec::new();
        let mut total = 0.0;
        let mut best = (0usize, 0.0f64);
        loop {
            let mut choice: Option<(f64, usize, usize)> = None;
            for &x in qubits.iter().filter(|&&x| !locked[x] && side[x] == 0) {
                for &y in qubits.iter().filter(|&&y| !locked[y] && side[y] == 1) {
                    let gain = d[x] + d[y] - 2.0 * c[x][y];
                    if choice.is_none_or(|(b, _, _)| gain > b) {
                        choice = Some((gain, x, y));
                    }
                }
            }
            let Some((gain, x, y)) = choice else { break };
            locked[x] = true;
            locked[y] = true;
            for &u in qubits.iter().filter(|&&u| !locked[u]) {
                if side[u] == 0 {
                    d[u] += 2.0 * c[u][x] - 2.0 * c[u][y];
                } else {
                    d[u] += 2.0 * c[u][y] - 2.0 * c[u][x];
                }
            }
            side[x] = 1;
            side[y] = 0;
            swaps.push((x, y));
            total += gain;
            if total > best.1 + EPS {
                best = (swaps.len(), total);
            }
        }
        if best.0 == 0 {
            break;
        }
        let mut next = a.clone();
        for &(x, y) in &swaps[..best.0] {
            next.block_of[x] = 1;
            next.block_of[y] = 0;
        }
        colocate_clbits(g, &mut next);
        let next_cut = compute_cut_size(g, &next)?;
        if next_cut > cut + EPS {
            break;
        }
        a = next;
        cut = next_cut;
        moves_applied += 2 * best.0;
        pass_history.push((pass, cut));
    }

    Ok(PartitionResult {
        cut_size: cut,
        cut_size_with_overhead: cut,
        balance: compute_balance(g, &a, cfg.k)?,
        assignment: a,
        comm_records: Vec::new(),
        pass_history,
        moves_applied,
        heuristic: Heuristic::Kl,
    })
}

use std::collections::BTreeSet;

use serde::Serialize;

use crate::circuit::Condition;
use crate::hypergraph::{Hypergraph, VertexKind};

use super::{PartitionConfig, PartitionResult};

/// Classical communication needed because a conditionally executed edge
/// spans more than one block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommRecord {
    pub edge_id: usize,
    pub edge_label: String,
    pub edge_kind: String,
    pub blocks: Vec<usize>,
    pub condition: Condition,
    pub condition_label: String,
    pub weight: f64,
    pub adjusted_weight: f64,
    pub protocol_note: String,
}

fn spanned(pins: &[usize], block_of: &[usize]) -> BTreeSet<usize> {
    pins.iter().map(|&p| block_of[p]).collect()
}

/// Records every cut edge that carries a condition and reports the cut with
/// those edges' weights scaled by `comm_overhead_factor`. The assignment and
/// plain cut are left untouched.
pub fn handle_conditional_cuts(
    g: &Hypergraph,
    mut r: PartitionResult,
    cfg: &PartitionConfig,
) -> PartitionResult {
    let block_of = &r.assignment.block_of;
    let mut records = Vec::new();
    let mut with_overhead = 0.0;
    for e in g.active_edges() {
        let blocks = spanned(&e.pins, block_of);
        let span = (blocks.len() - 1) as f64;
        let conditional = g.edge_condition(e).filter(|_| blocks.len() >= 2);
        let Some((condition, condition_label)) = conditional else {
            with_overhead += e.weight * span;
            continue;
        };
        let adjusted = e.weight * cfg.comm_overhead_factor;
        with_overhead += adjusted * span;
        let sources: BTreeSet<usize> = e
            .pins
            .iter()
            .filter(|&&p| g.vertices[p].kind == VertexKind::Clbit)
            .map(|&p| block_of[p])
            .collect();
        let blocks: Vec<usize> = blocks.into_iter().collect();
        let protocol_note = match sources.iter().next() {
            Some(src) => {
                let targets: Vec<String> = blocks
                    .iter()
                    .filter(|&b| b != src)
                    .map(|b| b.to_string())
                    .collect();
                format!(
                    "send `{condition_label}` outcome from block {src} to block(s) {} before conditional execution",
                    targets.join(",")
                )
            }
            None => format!("synchronize `{condition_label}` outcome across blocks {blocks:?}"),
        };
        records.push(CommRecord {
            edge_id: e.id,
            edge_label: e.label(),
            edge_kind: e.kind.name().to_string(),
            blocks,
            condition: condition.clone(),
            condition_label,
            weight: e.weight,
            adjusted_weight: adjusted,
            protocol_note,
        });
    }
    r.comm_records = records;
    r.cut_size_with_overhead = with_overhead;
    r
}

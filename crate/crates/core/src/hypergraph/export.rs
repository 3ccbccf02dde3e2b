use std::fmt::Write;

use serde::Serialize;

use super::{HyperedgeKind, Hypergraph, VertexKind};

/// Vertex-by-active-edge matrix. Pins of super-group edges are marked
/// `-1` (grouping constraint), other pins `1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub edge_ids: Vec<usize>,
    pub entries: Vec<Vec<i8>>,
}

impl IncidenceMatrix {
    pub fn get(&self, vertex: usize, col: usize) -> i8 {
        self.entries[vertex][col]
    }

    pub fn column_nonzeros(&self, col: usize) -> usize {
        self.entries.iter().filter(|row| row[col] != 0).count()
    }

    /// Header row of edge labels, then one row per vertex led by its label.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["vertex".to_string()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).expect("in-memory csv write");
        for (label, row) in self.row_labels.iter().zip(&self.entries) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

pub fn incidence_matrix(g: &Hypergraph) -> IncidenceMatrix {
    let active: Vec<_> = g.active_edges().collect();
    let mut entries = vec![vec![0i8; active.len()]; g.vertices.len()];
    for (col, e) in active.iter().enumerate() {
        let mark = match e.kind {
            HyperedgeKind::SuperGroup { .. } => -1,
            _ => 1,
        };
        for &p in &e.pins {
            entries[p][col] = mark;
        }
    }
    IncidenceMatrix {
        rows: g.vertices.len(),
        cols: active.len(),
        row_labels: g.vertices.iter().map(|v| v.label.clone()).collect(),
        col_labels: active.iter().map(|e| e.label()).collect(),
        edge_ids: active.iter().map(|e| e.id).collect(),
        entries,
    }
}

/// hMETIS text with edge and vertex weights (`fmt = 11`). Edge weights are
/// `round_half_up(weight * 100)`; qubits weigh 1 and classical bits 0.
pub fn export_hmetis(g: &Hypergraph) -> String {
    let active: Vec<_> = g.active_edges().collect();
    let mut out = String::new();
    let _ = writeln!(out, "{} {} 11", active.len(), g.vertices.len());
    for e in active {
        let weight = (e.weight * 100.0 + 0.5).floor() as i64;
        let _ = write!(out, "{weight}");
        for p in &e.pins {
            let _ = write!(out, " {}", p + 1);
        }
        out.push('\n');
    }
    for v in &g.vertices {
        let w = match v.kind {
            VertexKind::Qubit => 1,
            VertexKind::Clbit => 0,
        };
        let _ = writeln!(out, "{w}");
    }
    out
}

//! Weighted, typed hypergraph over qubit and classical-bit vertices.
//!
//! Edges absorbed into a super-group stay in storage (so listings can still
//! show them) but are excluded from the *active* edge set that exports,
//! statistics and partitioning operate on.

mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Condition;

pub use export::{export_hmetis, incidence_matrix, IncidenceMatrix};

pub const HYPERGRAPH_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Qubit,
    Clbit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub kind: VertexKind,
    pub label: String,
    /// For classical bits: the qubit vertex of the first measurement that
    /// writes this bit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub writer: Option<usize>,
}

impl Vertex {
    /// Weight counted against a block's QPU capacity.
    pub fn balance_weight(&self) -> usize {
        match self.kind {
            VertexKind::Qubit => 1,
            VertexKind::Clbit => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HyperedgeKind {
    Standard,
    Conditional {
        condition: Condition,
        /// Human-readable form, e.g. `c[0]==1`.
        condition_label: String,
        probability: f64,
    },
    Measurement,
    SuperGroup {
        member_edge_ids: Vec<usize>,
        group_label: String,
    },
}

impl HyperedgeKind {
    pub fn name(&self) -> &'static str {
        match self {
            HyperedgeKind::Standard => "standard",
            HyperedgeKind::Conditional { .. } => "conditional",
            HyperedgeKind::Measurement => "measurement",
            HyperedgeKind::SuperGroup { .. } => "super_group",
        }
    }

    pub const NAMES: [&'static str; 4] = ["standard", "conditional", "measurement", "super_group"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub id: usize,
    /// Sorted, duplicate-free vertex ids.
    pub pins: Vec<usize>,
    pub weight: f64,
    pub kind: HyperedgeKind,
    /// Source statements, e.g. `stmt 3.0`.
    #[serde(default)]
    pub origin: Vec<String>,
    /// Layer index of the originating statement, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
    /// Super-group edge that absorbed this edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbed_by: Option<usize>,
}

impl Hyperedge {
    pub fn is_active(&self) -> bool {
        self.absorbed_by.is_none()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            HyperedgeKind::Standard => format!("e{}", self.id),
            HyperedgeKind::Conditional { .. } => format!("ec{}", self.id),
            HyperedgeKind::Measurement => format!("em{}", self.id),
            HyperedgeKind::SuperGroup { group_label, .. } => group_label.clone(),
        }
    }

    pub fn condition(&self) -> Option<&Condition> {
        match &self.kind {
            HyperedgeKind::Conditional { condition, .. } => Some(condition),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Static circuits: qubit vertices and standard edges only.
    Primal,
    /// Adaptive circuits: adds classical bits and typed edges.
    Extended,
}

/// Circuit facts that do not become edges.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub source: String,
    pub resets: usize,
    pub single_qubit_gates: usize,
    pub measurements: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypergraphError {
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("hyperedge must have at least one pin")]
    EmptyPins,
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("{0} not allowed in a primal hypergraph")]
    ModeViolation(String),
    #[error("edge weight must be finite and >= 0, got {0}")]
    InvalidWeight(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("super-group needs at least one active member edge")]
    EmptyGroup,
    #[error("edge {0} is already absorbed into a super-group")]
    AlreadyAbsorbed(usize),
    #[error("unsupported hypergraph_version {0}")]
    Version(u32),
    #[error("malformed hypergraph document: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypergraph {
    pub mode: Mode,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Hyperedge>,
    pub info: BuildInfo,
    #[serde(skip)]
    labels: HashMap<String, usize>,
}

/// Structural counts over the active edge set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub num_vertices: usize,
    pub num_qubit_vertices: usize,
    pub num_clbit_vertices: usize,
    pub num_edges: usize,
    pub num_absorbed_edges: usize,
    pub edges_by_kind: BTreeMap<String, usize>,
    /// Kinds present among all stored edges, absorbed ones included.
    pub stored_kinds: BTreeSet<String>,
    pub total_pin_count: usize,
    pub total_weight: f64,
}

impl Hypergraph {
    pub fn new(mode: Mode) -> Self {
        Hypergraph {
            mode,
            vertices: Vec::new(),
            edges: Vec::new(),
            info: BuildInfo::default(),
            labels: HashMap::new(),
        }
    }

    pub fn add_vertex(
        &mut self,
        kind: VertexKind,
        label: impl Into<String>,
    ) -> Result<usize, HypergraphError> {
        let label = label.into();
        if self.mode == Mode::Primal && kind == VertexKind::Clbit {
            return Err(HypergraphError::ModeViolation(
                "classical-bit vertex".into(),
            ));
        }
        if self.labels.contains_key(&label) {
            return Err(HypergraphError::DuplicateLabel(label));
        }
        let id = self.vertices.len();
        self.labels.insert(label.clone(), id);
        self.vertices.push(Vertex {
            id,
            kind,
            label,
            writer: None,
        });
        Ok(id)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }

    pub fn set_writer(&mut self, clbit: usize, qubit: usize) -> Result<(), HypergraphError> {
        if qubit >= self.vertices.len() {
            return Err(HypergraphError::UnknownVertex(qubit));
        }
        let v = self
            .vertices
            .get_mut(clbit)
            .ok_or(HypergraphError::UnknownVertex(clbit))?;
        if v.writer.is_none() {
            v.writer = Some(qubit);
        }
        Ok(())
    }

    fn check_pins(&self, pins: &[usize]) -> Result<Vec<usize>, HypergraphError> {
        if pins.is_empty() {
            return Err(HypergraphError::EmptyPins);
        }
        if let Some(&v) = pins.iter().find(|&&v| v >= self.vertices.len()) {
            return Err(HypergraphError::UnknownVertex(v));
        }
        let mut pins = pins.to_vec();
        pins.sort_unstable();
        pins.dedup();
        Ok(pins)
    }

    pub fn add_edge(
        &mut self,
        pins: &[usize],
        weight: f64,
        kind: HyperedgeKind,
        origin: Vec<String>,
    ) -> Result<usize, HypergraphError> {
        let pins = self.check_pins(pins)?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(HypergraphError::InvalidWeight(weight));
        }
        match &kind {
            HyperedgeKind::Standard => {}
            HyperedgeKind::SuperGroup { .. } => {
                return Err(HypergraphError::ModeViolation(
                    "super-group edges must be created with add_super_group; direct super-group edge".into(),
                ));
            }
            other if self.mode == Mode::Primal => {
                return Err(HypergraphError::ModeViolation(format!(
                    "{} edge",
                    other.name()
                )));
            }
            HyperedgeKind::Conditional { probability, .. } => {
                if !(0.0..=1.0).contains(probability) {
                    return Err(HypergraphError::InvalidProbability(*probability));
                }
            }
            HyperedgeKind::Measurement => {}
        }
        let id = self.edges.len();
        self.edges.push(Hyperedge {
            id,
            pins,
            weight,
            kind,
            origin,
            layer: None,
            absorbed_by: None,
        });
        Ok(id)
    }

    /// Replaces the active `members` by one edge whose pins are the union of
    /// theirs and whose weight is the sum of their weights.
    pub fn add_super_group(
        &mut self,
        members: &[usize],
        group_label: impl Into<String>,
    ) -> Result<usize, HypergraphError> {
        if self.mode == Mode::Primal {
            return Err(HypergraphError::ModeViolation("super-group edge".into()));
        }
        if members.is_empty() {
            return Err(HypergraphError::EmptyGroup);
        }
        let mut pins = BTreeSet::new();
        let mut weight = 0.0;
        let mut origin = Vec::new();
        let mut layer: Option<usize> = None;
        for &m in members {
            let e = self.edges.get(m).ok_or(HypergraphError::UnknownEdge(m))?;
            if !e.is_active() {
                return Err(HypergraphError::AlreadyAbsorbed(m));
            }
            pins.extend(e.pins.iter().copied());
            weight += e.weight;
            origin.extend(e.origin.iter().cloned());
            layer = match (layer, e.layer) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        let mut member_edge_ids = members.to_vec();
        member_edge_ids.sort_unstable();
        member_edge_ids.dedup();
        let id = self.edges.len();
        for &m in &member_edge_ids {
            self.edges[m].absorbed_by = Some(id);
        }
        self.edges.push(Hyperedge {
            id,
            pins: pins.into_iter().collect(),
            weight,
            kind: HyperedgeKind::SuperGroup {
                member_edge_ids,
                group_label: group_label.into(),
            },
            origin,
            layer,
            absorbed_by: None,
        });
        Ok(id)
    }

    pub fn active_edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().filter(|e| e.is_active())
    }

    pub fn num_qubits(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Qubit)
            .count()
    }

    /// Active edges incident to each vertex.
    pub fn incident_edges(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for e in self.active_edges() {
            for &p in &e.pins {
                inc[p].push(e.id);
            }
        }
        inc
    }

    /// True if `edge` is conditional or a super-group absorbing a
    /// conditional edge.
    pub fn carries_condition(&self, edge: &Hyperedge) -> bool {
        match &edge.kind {
            HyperedgeKind::Conditional { .. } => true,
            HyperedgeKind::SuperGroup {
                member_edge_ids, ..
            } => member_edge_ids
                .iter()
                .any(|&m| self.carries_condition(&self.edges[m])),
            _ => false,
        }
    }

    /// First condition carried by `edge` or its members.
    pub fn edge_condition<'a>(&'a self, edge: &'a Hyperedge) -> Option<(&'a Condition, String)> {
        match &edge.kind {
            HyperedgeKind::Conditional {
                condition,
                condition_label,
                ..
            } => Some((condition, condition_label.clone())),
            HyperedgeKind::SuperGroup {
                member_edge_ids, ..
            } => member_edge_ids
                .iter()
                .find_map(|&m| self.edge_condition(&self.edges[m])),
            _ => None,
        }
    }

    pub fn stats(&self) -> Stats {
        let mut s = Stats {
            num_vertices: self.vertices.len(),
            num_qubit_vertices: self.num_qubits(),
            ..Stats::default()
        };
        s.num_clbit_vertices = s.num_vertices - s.num_qubit_vertices;
        for e in &self.edges {
            s.stored_kinds.insert(e.kind.name().to_string());
            if !e.is_active() {
                s.num_absorbed_edges += 1;
                continue;
            }
            s.num_edges += 1;
            *s.edges_by_kind
                .entry(e.kind.name().to_string())
                .or_default() += 1;
            s.total_pin_count += e.pins.len();
            s.total_weight += e.weight;
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            hypergraph_version: u32,
            #[serde(flatten)]
            graph: &'a Hypergraph,
        }
        serde_json::to_string_pretty(&Doc {
            hypergraph_version: HYPERGRAPH_VERSION,
            graph: self,
        })
        .expect("hypergraph serialization is infallible")
    }

    /// Reads a document written by [`Hypergraph::to_json`], re-checking
    /// every invariant.
    pub fn from_json(text: &str) -> Result<Hypergraph, HypergraphError> {
        #[derive(Deserialize)]
        struct Doc {
            hypergraph_version: u32,
            mode: Mode,
            vertices: Vec<Vertex>,
            edges: Vec<Hyperedge>,
            #[serde(default)]
            info: BuildInfo,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| HypergraphError::Malformed(e.to_string()))?;
        if doc.hypergraph_version != HYPERGRAPH_VERSION {
            return Err(HypergraphError::Version(doc.hypergraph_version));
        }
        let mut g = Hypergraph::new(doc.mode);
        g.info = doc.info;
        for (i, v) in doc.vertices.iter().enumerate() {
            if v.id != i {
                return Err(HypergraphError::Malformed(format!(
                    "vertex ids not contiguous at {i}"
                )));
            }
            g.add_vertex(v.kind, v.label.clone())?;
        }
        for v in &doc.vertices {
            if let Some(w) = v.writer {
                g.set_writer(v.id, w)?;
            }
        }
        for (i, e) in doc.edges.iter().enumerate() {
            if e.id != i {
                return Err(HypergraphError::Malformed(format!(
                    "edge ids not contiguous at {i}"
                )));
            }
            let id = match &e.kind {
                HyperedgeKind::SuperGroup {
                    member_edge_ids,
                    group_label,
                } => {
                    let id = g.add_super_group(member_edge_ids, group_label.clone())?;
                    // Weights and pins are recomputed; reject documents that disagree.
                    let stored = &g.edges[id];
                    if stored.pins != e.pins || (stored.weight - e.weight).abs() > 1e-9 {
                        return Err(HypergraphError::Malformed(format!(
                            "super-group {} does not match its members",
                            e.id
                        )));
                    }
                    g.edges[id].origin = e.origin.clone();
                    id
                }
                kind => g.add_edge(&e.pins, e.weight, kind.clone(), e.origin.clone())?,
            };
            g.edges[id].layer = e.layer;
        }
        for e in &doc.edges {
            if e.absorbed_by != g.edges[e.id].absorbed_by {
                return Err(HypergraphError::Malformed(format!(
                    "edge {} absorption does not match super-group membership",
                    e.id
                )));
            }
        }
        Ok(g)
    }
}

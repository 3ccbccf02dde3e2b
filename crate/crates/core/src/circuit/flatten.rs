//! Linearization of the circuit tree.

use std::fmt;

use serde::Serialize;

use super::{Block, Circuit, Condition, GateOp, MeasureOp, ResetOp, Statement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    If,
    While,
    For,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::If => "if",
            GroupKind::While => "while",
            GroupKind::For => "for",
        })
    }
}

/// Identity of an outermost control-flow block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupId {
    /// Position among all outermost blocks, in program order.
    pub index: usize,
    pub kind: GroupKind,
    /// Position among outermost blocks of the same kind.
    pub kind_ordinal: usize,
    pub line: Option<u32>,
}

impl GroupId {
    /// `e_while`, `e_if`, then `e_while_1`, `e_while_2`, ... for repeats.
    pub fn label(&self) -> String {
        if self.kind_ordinal == 0 {
            format!("e_{}", self.kind)
        } else {
            format!("e_{}_{}", self.kind, self.kind_ordinal)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlatOp {
    Gate(GateOp),
    Measure(MeasureOp),
    Reset(ResetOp),
}

/// An enclosing `while` instance. Copies produced by `for` unrolling are
/// distinct instances.
#[derive(Clone, Debug, PartialEq)]
pub struct WhileScope {
    pub instance: usize,
    pub cond: Condition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatEntry {
    pub op: FlatOp,
    /// Innermost governing condition (negated on `else` branches).
    pub path_condition: Option<Condition>,
    /// Every enclosing condition, outermost first.
    pub guards: Vec<Condition>,
    /// Outermost enclosing control-flow block.
    pub group: Option<GroupId>,
    pub whiles: Vec<WhileScope>,
    /// Indices from the top-level body down to this statement.
    pub path: Vec<usize>,
}

impl FlatEntry {
    pub fn qubits(&self) -> Vec<usize> {
        match &self.op {
            FlatOp::Gate(g) => g.qubits.iter().map(|q| q.0).collect(),
            FlatOp::Measure(m) => vec![m.qubit.0],
            FlatOp::Reset(r) => vec![r.qubit.0],
        }
    }

    pub fn written_clbit(&self) -> Option<usize> {
        match &self.op {
            FlatOp::Measure(m) => Some(m.clbit.0),
            _ => None,
        }
    }

    /// Classical bits read by any enclosing guard.
    pub fn read_clbits(&self) -> Vec<usize> {
        let mut bits: Vec<usize> = self
            .guards
            .iter()
            .flat_map(|g| g.clbits())
            .map(|b| b.0)
            .collect();
        bits.sort_unstable();
        bits.dedup();
        bits
    }

    pub fn origin_label(&self) -> String {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        format!("stmt {}", path.join("."))
    }
}

struct Flattener {
    unroll_for: bool,
    out: Vec<FlatEntry>,
    groups: usize,
    per_kind: [usize; 3],
    whiles: usize,
}

impl Flattener {
    fn walk(
        &mut self,
        body: &[Statement],
        guards: &mut Vec<Condition>,
        group: Option<GroupId>,
        whiles: &mut Vec<WhileScope>,
        path: &mut Vec<usize>,
    ) {
        for (i, stmt) in body.iter().enumerate() {
            path.push(i);
            let op = match stmt {
                Statement::Gate(g) => Some(FlatOp::Gate(g.clone())),
                Statement::Measure(m) => Some(FlatOp::Measure(*m)),
                Statement::Reset(r) => Some(FlatOp::Reset(*r)),
                Statement::Block(block) => {
                    let group = group.or_else(|| Some(self.new_group(block)));
                    self.block(block, guards, group, whiles, path);
                    None
                }
            };
            if let Some(op) = op {
                self.out.push(FlatEntry {
                    op,
                    path_condition: guards.last().cloned(),
                    guards: guards.clone(),
                    group,
                    whiles: whiles.clone(),
                    path: path.clone(),
                });
            }
            path.pop();
        }
    }

    fn new_group(&mut self, block: &Block) -> GroupId {
        let kind = match block {
            Block::If { .. } => GroupKind::If,
            Block::While { .. } => GroupKind::While,
            Block::For { .. } => GroupKind::For,
        };
        let slot = kind as usize;
        let id = GroupId {
            index: self.groups,
            kind,
            kind_ordinal: self.per_kind[slot],
            line: block.line().0,
        };
        self.groups += 1;
        self.per_kind[slot] += 1;
        id
    }

    fn block(
        &mut self,
        block: &Block,
        guards: &mut Vec<Condition>,
        group: Option<GroupId>,
        whiles: &mut Vec<WhileScope>,
        path: &mut Vec<usize>,
    ) {
        match block {
            Block::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                guards.push(cond.clone());
                path.push(0);
                self.walk(then_body, guards, group, whiles, path);
                path.pop();
                guards.pop();
                guards.push(cond.negate());
                path.push(1);
                self.walk(else_body, guards, group, whiles, path);
                path.pop();
                guards.pop();
            }
            Block::While { cond, body, .. } => {
                guards.push(cond.clone());
                whiles.push(WhileScope {
                    instance: self.whiles,
                    cond: cond.clone(),
                });
                self.whiles += 1;
                self.walk(body, guards, group, whiles, path);
                whiles.pop();
                guards.pop();
            }
            Block::For { count, body, .. } => {
                let repeats = if self.unroll_for { *count } else { 1 };
                for _ in 0..repeats {
                    self.walk(body, guards, group, whiles, path);
                }
            }
        }
    }
}

/// Linearizes `c` in program order.
///
/// `for` bodies are repeated `count` times when `unroll_for` is set and
/// emitted once otherwise; `while` bodies are always emitted once.
pub fn flatten(c: &Circuit, unroll_for: bool) -> Vec<FlatEntry> {
    let mut f = Flattener {
        unroll_for,
        out: Vec::new(),
        groups: 0,
        per_kind: [0; 3],
        whiles: 0,
    };
    f.walk(
        &c.body,
        &mut Vec::new(),
        None,
        &mut Vec::new(),
        &mut Vec::new(),
    );
    f.out
}

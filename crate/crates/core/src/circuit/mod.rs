//! Circuit intermediate representation.
//!
//! A [`Circuit`] is a tree: a top-level statement list whose items are
//! quantum operations or classical control-flow blocks (`if`/`else`,
//! `while`, `for`). Gate names are uninterpreted identifiers; nothing here
//! evaluates a unitary.

mod flatten;
pub mod generators;
mod layering;
mod parser;
mod serialize;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use flatten::{flatten, FlatEntry, FlatOp, GroupId, GroupKind, WhileScope};
pub use layering::{compute_layering, layer_entries, Layering};
pub use parser::{parse_circuit, parse_circuit_with, ParseError, ParseOptions};
pub use serialize::{circuit_from_json, circuit_to_json, serialize_circuit};

/// Version tag written into every circuit JSON document.
pub const IR_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitRef(pub usize);

/// Global classical bit index; registers are laid out in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClbitRef(pub usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    pub qubits: Vec<QubitRef>,
}

impl GateOp {
    pub fn new(name: impl Into<String>, params: Vec<f64>, qubits: &[usize]) -> Self {
        GateOp {
            name: name.into(),
            params,
            qubits: qubits.iter().copied().map(QubitRef).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureOp {
    pub qubit: QubitRef,
    pub clbit: ClbitRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetOp {
    pub qubit: QubitRef,
}

/// Classical predicate over measured bits.
///
/// `RegisterEquals` stores `expected[i]` for `bits[i]`; in circuit text the
/// bitstring is written most-significant (highest index) bit first.
/// `Not` never appears in circuit text: it is produced by [`flatten`] for
/// statements on the `else` branch of a register comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Condition {
    BitEquals {
        bit: ClbitRef,
        value: bool,
    },
    RegisterEquals {
        bits: Vec<ClbitRef>,
        expected: Vec<bool>,
    },
    Not {
        inner: Box<Condition>,
    },
}

impl Condition {
    pub fn bit(bit: usize, value: bool) -> Self {
        Condition::BitEquals {
            bit: ClbitRef(bit),
            value,
        }
    }

    /// Classical bits read by this predicate, in order.
    pub fn clbits(&self) -> Vec<ClbitRef> {
        match self {
            Condition::BitEquals { bit, .. } => vec![*bit],
            Condition::RegisterEquals { bits, .. } => bits.clone(),
            Condition::Not { inner } => inner.clbits(),
        }
    }

    pub fn reads(&self, clbit: ClbitRef) -> bool {
        self.clbits().contains(&clbit)
    }

    /// Logical complement, folding bit comparisons and double negation.
    pub fn negate(&self) -> Condition {
        match self {
            Condition::BitEquals { bit, value } => Condition::BitEquals {
                bit: *bit,
                value: !value,
            },
            Condition::Not { inner } => (**inner).clone(),
            other => Condition::Not {
                inner: Box::new(other.clone()),
            },
        }
    }
}

/// Source line of a block, kept for diagnostics only. Two lines always
/// compare equal so that reparsed circuits are structurally equal.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceLine(pub Option<u32>);

impl PartialEq for SourceLine {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for SourceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, "line {line}"),
            None => f.write_str("unknown line"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Block {
    If {
        cond: Condition,
        then_body: Vec<Statement>,
        #[serde(default)]
        else_body: Vec<Statement>,
        #[serde(default, skip_serializing)]
        line: SourceLine,
    },
    While {
        cond: Condition,
        body: Vec<Statement>,
        #[serde(default, skip_serializing)]
        line: SourceLine,
    },
    For {
        count: u32,
        body: Vec<Statement>,
        #[serde(default, skip_serializing)]
        line: SourceLine,
    },
}

impl Block {
    pub fn keyword(&self) -> &'static str {
        match self {
            Block::If { .. } => "if",
            Block::While { .. } => "while",
            Block::For { .. } => "for",
        }
    }

    pub fn line(&self) -> SourceLine {
        match self {
            Block::If { line, .. } | Block::While { line, .. } | Block::For { line, .. } => *line,
        }
    }

    /// Child statement lists (then/else for `if`).
    pub fn bodies(&self) -> Vec<&[Statement]> {
        match self {
            Block::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            Block::While { body, .. } | Block::For { body, .. } => vec![body],
        }
    }

    pub fn condition(&self) -> Option<&Condition> {
        match self {
            Block::If { cond, .. } | Block::While { cond, .. } => Some(cond),
            Block::For { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Statement {
    Gate(GateOp),
    Measure(MeasureOp),
    Reset(ResetOp),
    Block(Block),
}

impl Statement {
    pub fn gate(name: &str, params: Vec<f64>, qubits: &[usize]) -> Self {
        Statement::Gate(GateOp::new(name, params, qubits))
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Statement::Measure(MeasureOp {
            qubit: QubitRef(qubit),
            clbit: ClbitRef(clbit),
        })
    }

    pub fn reset(qubit: usize) -> Self {
        Statement::Reset(ResetOp {
            qubit: QubitRef(qubit),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalRegister {
    pub name: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    #[serde(default = "default_qubit_register")]
    pub qubit_register: String,
    pub num_qubits: usize,
    #[serde(default)]
    pub clbit_registers: Vec<ClassicalRegister>,
    pub body: Vec<Statement>,
}

fn default_qubit_register() -> String {
    "q".to_string()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit must declare at least one qubit")]
    NoQubits,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),
    #[error("qubit index {index} out of range (register has {size})")]
    QubitOutOfRange { index: usize, size: usize },
    #[error("classical bit index {index} out of range ({size} declared)")]
    ClbitOutOfRange { index: usize, size: usize },
    #[error("gate `{0}` has no qubit operands")]
    NoOperands(String),
    #[error("gate `{name}` uses qubit {qubit} more than once")]
    RepeatedQubit { name: String, qubit: usize },
    #[error("non-finite parameter on gate `{0}`")]
    NonFiniteParam(String),
    #[error("register comparison has {bits} bits but {expected} expected values")]
    ConditionWidth { bits: usize, expected: usize },
    #[error("register comparison must cover one whole classical register in order")]
    UnalignedRegisterCondition,
    #[error("negated conditions cannot guard blocks")]
    NegatedBlockCondition,
    #[error("for loop at {0} must have count >= 1")]
    ZeroForCount(SourceLine),
}

/// A condition that may read a classical bit before any measurement writes
/// it on some control-flow path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnwrittenRead {
    pub clbit: ClbitRef,
    pub label: String,
    pub line: Option<u32>,
}

impl fmt::Display for UnwrittenRead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition at {} reads `{}` before it is measured on every path",
            SourceLine(self.line),
            self.label
        )
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !parser::KEYWORDS.contains(&s)
}

impl Circuit {
    pub fn new(name: impl Into<String>, num_qubits: usize) -> Self {
        Circuit {
            name: name.into(),
            qubit_register: default_qubit_register(),
            num_qubits,
            clbit_registers: Vec::new(),
            body: Vec::new(),
        }
    }

    /// Appends a classical register and returns the global index of its
    /// first bit.
    pub fn add_clbit_register(&mut self, name: impl Into<String>, size: usize) -> usize {
        let offset = self.num_clbits();
        self.clbit_registers.push(ClassicalRegister {
            name: name.into(),
            size,
        });
        offset
    }

    pub fn num_clbits(&self) -> usize {
        self.clbit_registers.iter().map(|r| r.size).sum()
    }

    /// Register holding `clbit`, with the register's global offset.
    pub fn register_of(&self, clbit: ClbitRef) -> Option<(&ClassicalRegister, usize)> {
        let mut offset = 0;
        for reg in &self.clbit_registers {
            if clbit.0 < offset + reg.size {
                return Some((reg, offset));
            }
            offset += reg.size;
        }
        None
    }

    pub fn register_offset(&self, name: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for reg in &self.clbit_registers {
            if reg.name == name {
                return Some((offset, reg.size));
            }
            offset += reg.size;
        }
        None
    }

    /// `mid[0]`-style label of a classical bit.
    pub fn clbit_label(&self, clbit: ClbitRef) -> String {
        match self.register_of(clbit) {
            Some((reg, offset)) => format!("{}[{}]", reg.name, clbit.0 - offset),
            None => format!("c?[{}]", clbit.0),
        }
    }

    pub fn qubit_label(&self, qubit: QubitRef) -> String {
        format!("{}{}", self.qubit_register, qubit.0)
    }

    /// Compact textual form of a condition, e.g. `mid[0]==1` or `mid=="00"`.
    pub fn condition_text(&self, cond: &Condition) -> String {
        match cond {
            Condition::BitEquals { bit, value } => {
                format!("{}=={}", self.clbit_label(*bit), u8::from(*value))
            }
            Condition::RegisterEquals { bits, expected } => {
                let name = bits
                    .first()
                    .and_then(|b| self.register_of(*b))
                    .map(|(r, _)| r.name.clone())
                    .unwrap_or_else(|| "?".to_string());
                let text: String = expected
                    .iter()
                    .rev()
                    .map(|v| if *v { '1' } else { '0' })
                    .collect();
                format!("{name}==\"{text}\"")
            }
            Condition::Not { inner } => format!("!({})", self.condition_text(inner)),
        }
    }

    /// Checks every structural invariant of the IR.
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        if !is_identifier(&self.name) {
            return Err(CircuitError::InvalidIdentifier(self.name.clone()));
        }
        if !is_identifier(&self.qubit_register) {
            return Err(CircuitError::InvalidIdentifier(self.qubit_register.clone()));
        }
        let mut names = BTreeSet::new();
        names.insert(self.qubit_register.as_str());
        for reg in &self.clbit_registers {
            if !is_identifier(&reg.name) {
                return Err(CircuitError::InvalidIdentifier(reg.name.clone()));
            }
            if !names.insert(reg.name.as_str()) {
                return Err(CircuitError::DuplicateRegister(reg.name.clone()));
            }
        }
        self.validate_body(&self.body)
    }

    fn check_qubit(&self, q: QubitRef) -> Result<(), CircuitError> {
        if q.0 >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: q.0,
                size: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_clbit(&self, c: ClbitRef) -> Result<(), CircuitError> {
        let size = self.num_clbits();
        if c.0 >= size {
            return Err(CircuitError::ClbitOutOfRange { index: c.0, size });
        }
        Ok(())
    }

    fn validate_condition(&self, cond: &Condition) -> Result<(), CircuitError> {
        match cond {
            Condition::BitEquals { bit, .. } => self.check_clbit(*bit),
            Condition::RegisterEquals { bits, expected } => {
                if bits.len() != expected.len() {
                    return Err(CircuitError::ConditionWidth {
                        bits: bits.len(),
                        expected: expected.len(),
                    });
                }
                for b in bits {
                    self.check_clbit(*b)?;
                }
                let first = bits
                    .first()
                    .ok_or(CircuitError::UnalignedRegisterCondition)?;
                let (reg, offset) = self
                    .register_of(*first)
                    .ok_or(CircuitError::UnalignedRegisterCondition)?;
                let aligned = reg.size == bits.len()
                    && bits.iter().enumerate().all(|(i, b)| b.0 == offset + i);
                if !aligned {
                    return Err(CircuitError::UnalignedRegisterCondition);
                }
                Ok(())
            }
            Condition::Not { .. } => Err(CircuitError::NegatedBlockCondition),
        }
    }

    fn validate_body(&self, body: &[Statement]) -> Result<(), CircuitError> {
        for stmt in body {
            match stmt {
                Statement::Gate(g) => {
                    if !is_identifier(&g.name) {
                        return Err(CircuitError::InvalidIdentifier(g.name.clone()));
                    }
                    if g.qubits.is_empty() {
                        return Err(CircuitError::NoOperands(g.name.clone()));
                    }
                    if g.params.iter().any(|p| !p.is_finite()) {
                        return Err(CircuitError::NonFiniteParam(g.name.clone()));
                    }
                    let mut seen = BTreeSet::new();
                    for q in &g.qubits {
                        self.check_qubit(*q)?;
                        if !seen.insert(q.0) {
                            return Err(CircuitError::RepeatedQubit {
                                name: g.name.clone(),
                                qubit: q.0,
                            });
                        }
                    }
                }
                Statement::Measure(m) => {
                    self.check_qubit(m.qubit)?;
                    self.check_clbit(m.clbit)?;
                }
                Statement::Reset(r) => self.check_qubit(r.qubit)?,
                Statement::Block(block) => {
                    if let Some(cond) = block.condition() {
                        self.validate_condition(cond)?;
                    }
                    if let Block::For { count: 0, line, .. } = block {
                        return Err(CircuitError::ZeroForCount(*line));
                    }
                    for body in block.bodies() {
                        self.validate_body(body)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Forward dataflow over definitely-written bits: reports every condition
    /// that may read a bit no measurement has written on some path.
    pub fn unwritten_condition_reads(&self) -> Vec<UnwrittenRead> {
        let mut out = Vec::new();
        let written = BTreeSet::new();
        self.dataflow(&self.body, written, &mut out);
        out
    }

    fn dataflow(
        &self,
        body: &[Statement],
        mut written: BTreeSet<ClbitRef>,
        out: &mut Vec<UnwrittenRead>,
    ) -> BTreeSet<ClbitRef> {
        for stmt in body {
            match stmt {
                Statement::Measure(m) => {
                    written.insert(m.clbit);
                }
                Statement::Gate(_) | Statement::Reset(_) => {}
                Statement::Block(block) => {
                    if let Some(cond) = block.condition() {
                        for bit in cond.clbits() {
                            if !written.contains(&bit) {
                                out.push(UnwrittenRead {
                                    clbit: bit,
                                    label: self.clbit_label(bit),
                                    line: block.line().0,
                                });
                            }
                        }
                    }
                    written = match block {
                        Block::If {
                            then_body,
                            else_body,
                            ..
                        } => {
                            let a = self.dataflow(then_body, written.clone(), out);
                            let b = self.dataflow(else_body, written.clone(), out);
                            a.intersection(&b).copied().collect()
                        }
                        // The body may run zero times.
                        Block::While { body, .. } => {
                            self.dataflow(body, written.clone(), out);
                            written
                        }
                        Block::For { body, .. } => self.dataflow(body, written, out),
                    };
                }
            }
        }
        written
    }

    /// True when the circuit contains an `if` or `while` anywhere.
    pub fn has_adaptive_control_flow(&self) -> bool {
        fn walk(body: &[Statement]) -> bool {
            body.iter().any(|s| match s {
                Statement::Block(Block::For { body, .. }) => walk(body),
                Statement::Block(_) => true,
                _ => false,
            })
        }
        walk(&self.body)
    }

    pub fn has_control_flow(&self) -> bool {
        self.body.iter().any(|s| matches!(s, Statement::Block(_)))
    }
}

//! Recursive-descent parser for the circuit text format.
//!
//! ```text
//! circuit <name>;
//! qubit[<n>] q;
//! bit[<n>] <reg>;
//! <gate>(<real>, ...) q[<i>], q[<j>];
//! <reg>[<i>] = measure q[<i>];
//! reset q[<i>];
//! if (<cond>) { ... } else { ... }
//! while (<cond>) { ... }
//! for <k> { ... }
//! ```
//!
//! Conditions are `reg[i]`, `reg[i] == 0|1` or `reg == "bits"`.

use std::f64::consts::PI;

use thiserror::Error;

use super::{
    Block, Circuit, CircuitError, ClassicalRegister, ClbitRef, Condition, GateOp, MeasureOp,
    QubitRef, ResetOp, SourceLine, Statement,
};

pub(crate) const KEYWORDS: &[&str] = &[
    "circuit", "qubit", "bit", "measure", "reset", "if", "else", "while", "for",
];

const UNSUPPORTED: &[&str] = &[
    "OPENQASM", "include", "gate", "def", "let", "barrier", "delay", "input", "output", "const",
    "qreg", "creg", "box", "switch", "break", "continue", "return", "float", "int", "uint",
    "angle", "bool", "duration", "stretch", "opaque", "extern", "cal", "defcal", "array",
    "complex", "end", "ctrl", "inv", "pow", "negctrl",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("undeclared register `{name}` at {line}:{col}")]
    UndeclaredRegister { name: String, line: u32, col: u32 },
    #[error("index {index} out of range for `{register}` (size {size}) at {line}:{col}")]
    IndexOutOfRange {
        register: String,
        index: usize,
        size: usize,
        line: u32,
        col: u32,
    },
    #[error("unsupported construct `{construct}` at {line}:{col}")]
    UnsupportedConstruct {
        construct: String,
        line: u32,
        col: u32,
    },
    #[error("invalid circuit: {0}")]
    Invalid(#[from] CircuitError),
    #[error("strict mode: {0}")]
    UnmeasuredConditionBit(String),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject conditions that may read a classical bit before it is measured.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let syntax = |line, col, message: String| ParseError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut col);
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(1, &mut i, &mut col);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                advance(1, &mut i, &mut col);
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    advance(1, &mut i, &mut col);
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i, &mut col);
                }
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c == '"' {
            advance(1, &mut i, &mut col);
            let start = i;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                advance(1, &mut i, &mut col);
            }
            if chars.get(i) != Some(&'"') {
                return Err(syntax(start_line, start_col, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            advance(1, &mut i, &mut col);
            Tok::Str(s)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let punct = match two.as_str() {
                "==" => Some("=="),
                "->" => Some("->"),
                _ => None,
            };
            if let Some(p) = punct {
                advance(2, &mut i, &mut col);
                Tok::Punct(p)
            } else {
                let p = match c {
                    ';' => ";",
                    ',' => ",",
                    '(' => "(",
                    ')' => ")",
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    '=' => "=",
                    '-' => "-",
                    '+' => "+",
                    '*' => "*",
                    '/' => "/",
                    '!' => "!",
                    '<' => "<",
                    '>' => ">",
                    '&' => "&",
                    '|' => "|",
                    '@' => "@",
                    _ => {
                        return Err(syntax(line, col, format!("unexpected character `{c}`")));
                    }
                };
                advance(1, &mut i, &mut col);
                Tok::Punct(p)
            }
        };
        out.push(Token {
            tok,
            line: start_line,
            col: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    circuit: Circuit,
    qubits_declared: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Token, message: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        let t = self.next();
        if matches!(&t.tok, Tok::Punct(q) if *q == p) {
            Ok(t)
        } else {
            let found = Self::describe(&t.tok);
            self.err(&t, format!("expected `{p}`, found {found}"))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn expect_ident(&mut self) -> PResult<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => {
                let found = Self::describe(other);
                self.err(&t, format!("expected identifier, found {found}"))
            }
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(t.clone()),
            other => {
                let found = Self::describe(other);
                self.err(&t, format!("expected `{kw}`, found {found}"))
            }
        }
    }

    fn expect_uint(&mut self) -> PResult<(usize, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => match s.parse::<usize>() {
                Ok(v) => Ok((v, t.clone())),
                Err(_) => self.err(&t, format!("integer `{s}` too large")),
            },
            other => {
                let found = Self::describe(other);
                self.err(&t, format!("expected integer, found {found}"))
            }
        }
    }

    fn unsupported<T>(&self, tok: &Token, construct: &str) -> PResult<T> {
        Err(ParseError::UnsupportedConstruct {
            construct: construct.to_string(),
            line: tok.line,
            col: tok.col,
        })
    }

    fn program(mut self) -> PResult<Circuit> {
        self.expect_keyword_or_unsupported("circuit")?;
        let (name, tok) = self.expect_ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return self.err(&tok, format!("`{name}` is a reserved word"));
        }
        self.circuit.name = name;
        self.expect_punct(";")?;
        let mut body = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "qubit" || kw == "bit" => self.declaration()?,
                Tok::Punct("}") => return self.err(&t, "unmatched `}`"),
                _ => body.push(self.statement()?),
            }
        }
        if !self.qubits_declared {
            let t = self.peek().clone();
            return self.err(&t, "missing qubit register declaration");
        }
        self.circuit.body = body;
        self.circuit.validate()?;
        Ok(self.circuit)
    }

    fn expect_keyword_or_unsupported(&mut self, kw: &str) -> PResult<()> {
        let t = self.peek().clone();
        if let Tok::Ident(s) = &t.tok {
            if UNSUPPORTED.contains(&s.as_str()) {
                return self.unsupported(&t, s);
            }
        }
        self.expect_keyword(kw).map(|_| ())
    }

    fn declaration(&mut self) -> PResult<()> {
        let kw = self.next();
        let is_qubit = matches!(&kw.tok, Tok::Ident(s) if s == "qubit");
        self.expect_punct("[")?;
        let (size, size_tok) = self.expect_uint()?;
        self.expect_punct("]")?;
        let (name, name_tok) = self.expect_ident()?;
        self.expect_punct(";")?;
        if KEYWORDS.contains(&name.as_str()) {
            return self.err(&name_tok, format!("`{name}` is a reserved word"));
        }
        let clash = (self.qubits_declared && self.circuit.qubit_register == name)
            || self.circuit.clbit_registers.iter().any(|r| r.name == name);
        if clash {
            return self.err(&name_tok, format!("register `{name}` declared twice"));
        }
        if is_qubit {
            if self.qubits_declared {
                return self.unsupported(&kw, "multiple qubit registers");
            }
            if size == 0 {
                return self.err(&size_tok, "qubit register must have size >= 1");
            }
            self.circuit.qubit_register = name;
            self.circuit.num_qubits = size;
            self.qubits_declared = true;
        } else {
            self.circuit
                .clbit_registers
                .push(ClassicalRegister { name, size });
        }
        Ok(())
    }

    fn block_body(&mut self) -> PResult<Vec<Statement>> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Punct("}") => {
                    self.next();
                    return Ok(body);
                }
                Tok::Eof => return self.err(&t, "unterminated block, expected `}`"),
                Tok::Ident(kw) if kw == "qubit" || kw == "bit" => {
                    return self.unsupported(&t, "declaration inside block");
                }
                _ => body.push(self.statement()?),
            }
        }
    }

    fn qubit_ref(&mut self) -> PResult<QubitRef> {
        let (name, tok) = self.expect_ident()?;
        if !self.qubits_declared || name != self.circuit.qubit_register {
            return Err(ParseError::UndeclaredRegister {
                name,
                line: tok.line,
                col: tok.col,
            });
        }
        if !self.is_punct("[") {
            let t = self.peek().clone();
            return self.unsupported(&t, "whole-register operand");
        }
        self.next();
        let (index, idx_tok) = self.expect_uint()?;
        self.expect_punct("]")?;
        if index >= self.circuit.num_qubits {
            return Err(ParseError::IndexOutOfRange {
                register: name,
                index,
                size: self.circuit.num_qubits,
                line: idx_tok.line,
                col: idx_tok.col,
            });
        }
        Ok(QubitRef(index))
    }

    fn clbit_register(&self, name: &str, tok: &Token) -> PResult<(usize, usize)> {
        self.circuit
            .register_offset(name)
            .ok_or_else(|| ParseError::UndeclaredRegister {
                name: name.to_string(),
                line: tok.line,
                col: tok.col,
            })
    }

    fn clbit_index(&mut self, name: &str, tok: &Token) -> PResult<ClbitRef> {
        let (offset, size) = self.clbit_register(name, tok)?;
        self.expect_punct("[")?;
        let (index, idx_tok) = self.expect_uint()?;
        self.expect_punct("]")?;
        if index >= size {
            return Err(ParseError::IndexOutOfRange {
                register: name.to_string(),
                index,
                size,
                line: idx_tok.line,
                col: idx_tok.col,
            });
        }
        Ok(ClbitRef(offset + index))
    }

    fn condition(&mut self) -> PResult<Condition> {
        let (name, tok) = self.expect_ident()?;
        if self.is_punct("[") {
            let bit = self.clbit_index(&name, &tok)?;
            if self.is_punct("==") {
                self.next();
                let (v, vt) = self.expect_uint()?;
                let value = match v {
                    0 => false,
                    1 => true,
                    _ => return self.err(&vt, "bit comparison must be against 0 or 1"),
                };
                return Ok(Condition::BitEquals { bit, value });
            }
            return Ok(Condition::BitEquals { bit, value: true });
        }
        let (offset, size) = self.clbit_register(&name, &tok)?;
        let t = self.peek().clone();
        if !self.is_punct("==") {
            return self.unsupported(&t, "condition expression");
        }
        self.next();
        let st = self.next();
        let Tok::Str(bits) = &st.tok else {
            return self.err(&st, "expected bitstring literal");
        };
        if bits.len() != size || !bits.chars().all(|c| c == '0' || c == '1') {
            return self.err(
                &st,
                format!("bitstring must have {size} binary digits for `{name}`"),
            );
        }
        let expected: Vec<bool> = bits.chars().rev().map(|c| c == '1').collect();
        Ok(Condition::RegisterEquals {
            bits: (offset..offset + size).map(ClbitRef).collect(),
            expected,
        })
    }

    fn real(&mut self) -> PResult<f64> {
        let mut sign = 1.0;
        if self.is_punct("-") {
            self.next();
            sign = -1.0;
        }
        let t = self.next();
        let value = match &t.tok {
            Tok::Number(s) => match s.parse::<f64>() {
                Ok(v) => v,
                Err(_) => return self.err(&t, format!("malformed number `{s}`")),
            },
            Tok::Ident(s) if s == "pi" || s == "π" => PI,
            Tok::Ident(s) => return self.unsupported(&t, &format!("parameter expression `{s}`")),
            other => {
                let found = Self::describe(other);
                return self.err(&t, format!("expected real parameter, found {found}"));
            }
        };
        if self.is_punct("*") || self.is_punct("/") || self.is_punct("+") {
            let t = self.peek().clone();
            return self.unsupported(&t, "arithmetic expression");
        }
        Ok(sign * value)
    }

    fn statement(&mut self) -> PResult<Statement> {
        let t = self.peek().clone();
        let word = match &t.tok {
            Tok::Ident(s) => s.clone(),
            other => {
                let found = Self::describe(other);
                return self.err(&t, format!("expected statement, found {found}"));
            }
        };
        if UNSUPPORTED.contains(&word.as_str()) {
            return self.unsupported(&t, &word);
        }
        let line = SourceLine(Some(t.line));
        match word.as_str() {
            "reset" => {
                self.next();
                let qubit = self.qubit_ref()?;
                self.expect_punct(";")?;
                Ok(Statement::Reset(ResetOp { qubit }))
            }
            "measure" => self.unsupported(&t, "measure arrow syntax"),
            "if" => {
                self.next();
                self.expect_punct("(")?;
                let cond = self.condition()?;
                self.expect_punct(")")?;
                let then_body = self.block_body()?;
                let mut else_body = Vec::new();
                if matches!(&self.peek().tok, Tok::Ident(s) if s == "else") {
                    self.next();
                    if matches!(&self.peek().tok, Tok::Ident(s) if s == "if") {
                        let t = self.peek().clone();
                        return self.unsupported(&t, "else if");
                    }
                    else_body = self.block_body()?;
                }
                Ok(Statement::Block(Block::If {
                    cond,
                    then_body,
                    else_body,
                    line,
                }))
            }
            "else" => self.err(&t, "`else` without matching `if`"),
            "while" => {
                self.next();
                self.expect_punct("(")?;
                let cond = self.condition()?;
                self.expect_punct(")")?;
                let body = self.block_body()?;
                Ok(Statement::Block(Block::While { cond, body, line }))
            }
            "for" => {
                self.next();
                let (count, ct) = self.expect_uint()?;
                if count == 0 {
                    return self.err(&ct, "for count must be >= 1");
                }
                let count =
                    u32::try_from(count).or_else(|_| self.err(&ct, "for count too large"))?;
                let body = self.block_body()?;
                Ok(Statement::Block(Block::For { count, body, line }))
            }
            "circuit" => self.err(&t, "duplicate `circuit` header"),
            _ => {
                self.next();
                if self.is_punct("[") {
                    // <reg>[i] = measure q[j];
                    let clbit = self.clbit_index(&word, &t)?;
                    self.expect_punct("=")?;
                    self.expect_keyword("measure")?;
                    let qubit = self.qubit_ref()?;
                    self.expect_punct(";")?;
                    return Ok(Statement::Measure(MeasureOp { qubit, clbit }));
                }
                if self.is_punct("=") {
                    let t = self.peek().clone();
                    return self.unsupported(&t, "whole-register assignment");
                }
                let mut params = Vec::new();
                if self.is_punct("(") {
                    self.next();
                    if !self.is_punct(")") {
                        params.push(self.real()?);
                        while self.is_punct(",") {
                            self.next();
                            params.push(self.real()?);
                        }
                    }
                    self.expect_punct(")")?;
                }
                let mut qubits = vec![self.qubit_ref()?];
                while self.is_punct(",") {
                    self.next();
                    qubits.push(self.qubit_ref()?);
                }
                self.expect_punct(";")?;
                let mut seen = std::collections::BTreeSet::new();
                if let Some(q) = qubits.iter().find(|q| !seen.insert(q.0)) {
                    return self.err(&t, format!("gate `{word}` repeats qubit {}", q.0));
                }
                Ok(Statement::Gate(GateOp {
                    name: word,
                    params,
                    qubits,
                }))
            }
        }
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    parse_circuit_with(text, ParseOptions::default())
}

pub fn parse_circuit_with(text: &str, options: ParseOptions) -> Result<Circuit, ParseError> {
    let tokens = tokenize(text)?;
    let parser = Parser {
        tokens,
        pos: 0,
        circuit: Circuit::new("unnamed", 0),
        qubits_declared: false,
    };
    let circuit = parser.program()?;
    if options.strict {
        if let Some(read) = circuit.unwritten_condition_reads().first() {
            return Err(ParseError::UnmeasuredConditionBit(read.to_string()));
        }
    }
    Ok(circuit)
}

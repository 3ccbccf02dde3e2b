//! Benchmark circuit families: QPE, IQPE, VQE, random adaptive and
//! repeat-until-success.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{compute_layering, Block, Circuit, Condition, SourceLine, Statement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("{generator}: `{arg}` must be at least {min}, got {got}")]
    InvalidSize {
        generator: &'static str,
        arg: &'static str,
        min: u64,
        got: u64,
    },
    #[error("invalid generator spec `{spec}`: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("invalid draw probabilities: {0}")]
    BadProbabilities(String),
}

fn at_least(
    generator: &'static str,
    arg: &'static str,
    got: usize,
    min: usize,
) -> Result<(), GeneratorError> {
    if got < min {
        return Err(GeneratorError::InvalidSize {
            generator,
            arg,
            min: min as u64,
            got: got as u64,
        });
    }
    Ok(())
}

fn if_block(cond: Condition, then_body: Vec<Statement>, else_body: Vec<Statement>) -> Statement {
    Statement::Block(Block::If {
        cond,
        then_body,
        else_body,
        line: SourceLine(None),
    })
}

fn while_block(cond: Condition, body: Vec<Statement>) -> Statement {
    Statement::Block(Block::While {
        cond,
        body,
        line: SourceLine(None),
    })
}

fn for_block(count: u32, body: Vec<Statement>) -> Statement {
    Statement::Block(Block::For {
        count,
        body,
        line: SourceLine(None),
    })
}

/// Quantum phase estimation with `n_counting` counting qubits and one
/// target qubit (index `n_counting`).
///
/// Hadamards on the counting register, a ladder of `cp` gates standing in
/// for controlled-U^(2^j), the textbook inverse QFT without swaps
/// (`n(n-1)/2` controlled phases and `n` Hadamards), then measurement of
/// the counting register.
pub fn gen_qpe(n_counting: usize) -> Result<Circuit, GeneratorError> {
    at_least("qpe", "n", n_counting, 1)?;
    let n = n_counting;
    let target = n;
    let mut c = Circuit::new(format!("qpe_{n}"), n + 1);
    c.add_clbit_register("c", n);
    let phase = 2.0 * PI / 3.0;
    for q in 0..n {
        c.body.push(Statement::gate("h", vec![], &[q]));
    }
    for j in 0..n {
        let angle = (phase * f64::from(1u32 << j.min(30))) % (2.0 * PI);
        c.body
            .push(Statement::gate("cp", vec![angle], &[j, target]));
    }
    for j in (0..n).rev() {
        for m in (j + 1..n).rev() {
            let angle = -PI / f64::from(1u32 << (m - j).min(30));
            c.body.push(Statement::gate("cp", vec![angle], &[m, j]));
        }
        c.body.push(Statement::gate("h", vec![], &[j]));
    }
    for q in 0..n {
        c.body.push(Statement::measure(q, q));
    }
    Ok(c)
}

/// Iterative phase estimation on two qubits: ancilla `q[0]`, eigenstate
/// `q[1]`. From the second iteration on, a phase correction on the ancilla
/// is guarded by the bit measured in the previous iteration.
pub fn gen_iqpe(iterations: usize) -> Result<Circuit, GeneratorError> {
    at_least("iqpe", "iterations", iterations, 1)?;
    let mut c = Circuit::new(format!("iqpe_{iterations}"), 2);
    c.add_clbit_register("c", iterations);
    let phase = 2.0 * PI / 3.0;
    for k in 0..iterations {
        let power = iterations - 1 - k;
        c.body.push(Statement::gate("h", vec![], &[0]));
        let angle = (phase * f64::from(1u32 << power.min(30))) % (2.0 * PI);
        c.body.push(Statement::gate("cp", vec![angle], &[0, 1]));
        if k > 0 {
            c.body.push(if_block(
                Condition::bit(k - 1, true),
                vec![Statement::gate("p", vec![-PI / 2.0], &[0])],
                vec![],
            ));
        }
        c.body.push(Statement::gate("h", vec![], &[0]));
        c.body.push(Statement::measure(0, k));
        c.body.push(Statement::reset(0));
    }
    Ok(c)
}

/// Hardware-efficient VQE ansatz inside a fixed-count feedback loop:
/// `for iterations { layers x (ry on every qubit, cz chain); measure all;
/// reset all }`.
pub fn gen_vqe(
    n_qubits: usize,
    ansatz_layers: usize,
    feedback_iterations: usize,
) -> Result<Circuit, GeneratorError> {
    at_least("vqe", "n", n_qubits, 1)?;
    at_least("vqe", "layers", ansatz_layers, 1)?;
    at_least("vqe", "iterations", feedback_iterations, 1)?;
    let mut c = Circuit::new(
        format!("vqe_{n_qubits}_l{ansatz_layers}_i{feedback_iterations}"),
        n_qubits,
    );
    c.add_clbit_register("c", n_qubits);
    let mut body = Vec::new();
    for layer in 0..ansatz_layers {
        for q in 0..n_qubits {
            let theta = 0.1 * (1 + layer * n_qubits + q) as f64;
            body.push(Statement::gate("ry", vec![theta], &[q]));
        }
        for q in 1..n_qubits {
            body.push(Statement::gate("cz", vec![], &[q - 1, q]));
        }
    }
    for q in 0..n_qubits {
        body.push(Statement::measure(q, q));
    }
    for q in 0..n_qubits {
        body.push(Statement::reset(q));
    }
    let count = u32::try_from(feedback_iterations).unwrap_or(u32::MAX);
    c.body.push(for_block(count, body));
    Ok(c)
}

/// Rotation angle of the repeat-until-success gadget: `cos(theta - pi) = 3/5`.
pub fn rus_theta() -> f64 {
    PI + (3.0f64 / 5.0).acos()
}

/// Repeat-until-success Rz(theta) gadgets, one per group of four qubits.
///
/// Block `b` uses ancilla `4b` and data qubits `4b+1..4b+3`. The ancilla is
/// prepared, entangled, measured into `m[b]`, and the gadget is retried in a
/// `while (m[b] == 1)` loop before the ancilla is reset. Consecutive blocks
/// are linked by a `cz` between the last data qubit of one block and the
/// ancilla of the next. Qubits beyond the last full group stay idle.
pub fn gen_rus(n_qubits: usize) -> Result<Circuit, GeneratorError> {
    at_least("rus", "n", n_qubits, 4)?;
    let blocks = n_qubits / 4;
    let theta = rus_theta();
    let mut c = Circuit::new(format!("rus_{n_qubits}"), n_qubits);
    c.add_clbit_register("m", blocks);
    for b in 0..blocks {
        let (a, d0, d1, d2) = (4 * b, 4 * b + 1, 4 * b + 2, 4 * b + 3);
        if b > 0 {
            c.body.push(Statement::gate("cz", vec![], &[a - 1, a]));
        }
        c.body.push(Statement::gate("h", vec![], &[a]));
        c.body.push(Statement::gate("cx", vec![], &[a, d0]));
        c.body.push(Statement::gate("cx", vec![], &[d0, d1]));
        c.body.push(Statement::gate("rz", vec![theta], &[d1]));
        c.body.push(Statement::gate("cz", vec![], &[d1, d2]));
        c.body.push(Statement::gate("cx", vec![], &[a, d2]));
        c.body.push(Statement::gate("h", vec![], &[a]));
        c.body.push(Statement::measure(a, b));
        c.body.push(while_block(
            Condition::bit(b, true),
            vec![
                Statement::reset(a),
                Statement::gate("h", vec![], &[a]),
                Statement::gate("cx", vec![], &[a, d0]),
                Statement::gate("rz", vec![theta], &[d0]),
                Statement::gate("cx", vec![], &[a, d2]),
                Statement::gate("h", vec![], &[a]),
                Statement::measure(a, b),
            ],
        ));
        c.body.push(Statement::reset(a));
    }
    Ok(c)
}

/// Draw weights for [`gen_random_adaptive_with`]. Weights need not sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomCircuitConfig {
    pub p_gate1: f64,
    pub p_gate2: f64,
    pub p_measure: f64,
    pub p_reset: f64,
    pub p_if: f64,
    pub p_while: f64,
    pub p_for: f64,
    pub max_nesting: usize,
}

impl Default for RandomCircuitConfig {
    fn default() -> Self {
        RandomCircuitConfig {
            p_gate1: 0.35,
            p_gate2: 0.35,
            p_measure: 0.10,
            p_reset: 0.05,
            p_if: 0.07,
            p_while: 0.04,
            p_for: 0.04,
            max_nesting: 2,
        }
    }
}

impl RandomCircuitConfig {
    fn weights(&self) -> [f64; 7] {
        [
            self.p_gate1,
            self.p_gate2,
            self.p_measure,
            self.p_reset,
            self.p_if,
            self.p_while,
            self.p_for,
        ]
    }
}

#[derive(Clone, Copy)]
enum Draw {
    Gate1,
    Gate2,
    Measure,
    Reset,
    If,
    While,
    For,
}

const DRAWS: [Draw; 7] = [
    Draw::Gate1,
    Draw::Gate2,
    Draw::Measure,
    Draw::Reset,
    Draw::If,
    Draw::While,
    Draw::For,
];

struct RandomBuilder<'a> {
    rng: ChaCha8Rng,
    n: usize,
    cfg: &'a RandomCircuitConfig,
    all: WeightedIndex<f64>,
    flat: WeightedIndex<f64>,
}

impl RandomBuilder<'_> {
    fn angle(&mut self) -> f64 {
        f64::from(self.rng.gen_range(1..6284u32)) / 1000.0
    }

    fn gate1(&mut self) -> Statement {
        let q = self.rng.gen_range(0..self.n);
        match self.rng.gen_range(0..6) {
            0 => Statement::gate("h", vec![], &[q]),
            1 => Statement::gate("x", vec![], &[q]),
            2 => Statement::gate("s", vec![], &[q]),
            3 => Statement::gate("t", vec![], &[q]),
            4 => {
                let a = self.angle();
                Statement::gate("rz", vec![a], &[q])
            }
            _ => {
                let a = self.angle();
                Statement::gate("ry", vec![a], &[q])
            }
        }
    }

    fn gate2(&mut self) -> Statement {
        let a = self.rng.gen_range(0..self.n);
        let mut b = self.rng.gen_range(0..self.n - 1);
        if b >= a {
            b += 1;
        }
        match self.rng.gen_range(0..3) {
            0 => Statement::gate("cx", vec![], &[a, b]),
            1 => Statement::gate("cz", vec![], &[a, b]),
            _ => {
                let t = self.angle();
                Statement::gate("cp", vec![t], &[a, b])
            }
        }
    }

    fn pick_written(&mut self, written: &BTreeSet<usize>) -> usize {
        let bits: Vec<usize> = written.iter().copied().collect();
        bits[self.rng.gen_range(0..bits.len())]
    }

    fn body(
        &mut self,
        nesting: usize,
        len: usize,
        written: &mut BTreeSet<usize>,
    ) -> Vec<Statement> {
        (0..len).map(|_| self.statement(nesting, written)).collect()
    }

    fn statement(&mut self, nesting: usize, written: &mut BTreeSet<usize>) -> Statement {
        let blocks_allowed = nesting < self.cfg.max_nesting;
        let draw = if blocks_allowed {
            DRAWS[self.all.sample(&mut self.rng)]
        } else {
            DRAWS[self.flat.sample(&mut self.rng)]
        };
        let needs_bit = matches!(draw, Draw::If | Draw::While);
        let draw = if needs_bit && written.is_empty() {
            Draw::Measure
        } else {
            draw
        };
        match draw {
            Draw::Gate1 => self.gate1(),
            Draw::Gate2 => self.gate2(),
            Draw::Measure => {
                let q = self.rng.gen_range(0..self.n);
                let b = self.rng.gen_range(0..self.n);
                written.insert(b);
                Statement::measure(q, b)
            }
            Draw::Reset => Statement::reset(self.rng.gen_range(0..self.n)),
            Draw::If => {
                let bit = self.pick_written(written);
                let value = self.rng.gen_bool(0.5);
                let len = self.rng.gen_range(1..=3);
                let mut then_w = written.clone();
                let then_body = self.body(nesting + 1, len, &mut then_w);
                let mut else_w = written.clone();
                let else_body = if self.rng.gen_bool(0.5) {
                    let len = self.rng.gen_range(1..=2);
                    self.body(nesting + 1, len, &mut else_w)
                } else {
                    Vec::new()
                };
                *written = then_w.intersection(&else_w).copied().collect();
                if_block(Condition::bit(bit, value), then_body, else_body)
            }
            Draw::While => {
                let bit = self.pick_written(written);
                let value = self.rng.gen_bool(0.5);
                let len = self.rng.gen_range(1..=2);
                let mut inner = written.clone();
                let mut body = self.body(nesting + 1, len, &mut inner);
                // Re-measure the guard bit so the loop can exit.
                body.push(Statement::measure(self.rng.gen_range(0..self.n), bit));
                while_block(Condition::bit(bit, value), body)
            }
            Draw::For => {
                let count = self.rng.gen_range(1..=3);
                let len = self.rng.gen_range(1..=3);
                let body = self.body(nesting + 1, len, written);
                for_block(count, body)
            }
        }
    }
}

pub fn gen_random_adaptive(
    n_qubits: usize,
    target_depth: usize,
    seed: u64,
) -> Result<Circuit, GeneratorError> {
    gen_random_adaptive_with(
        n_qubits,
        target_depth,
        seed,
        &RandomCircuitConfig::default(),
    )
}

/// Random gates interleaved with measurements, resets and `if`/`else`,
/// `while` and `for` blocks (nesting depth at most `cfg.max_nesting`).
/// Statements are appended until the layered depth reaches `target_depth`.
/// Every condition reads a bit that is measured on all paths before it.
pub fn gen_random_adaptive_with(
    n_qubits: usize,
    target_depth: usize,
    seed: u64,
    cfg: &RandomCircuitConfig,
) -> Result<Circuit, GeneratorError> {
    at_least("random", "n", n_qubits, 2)?;
    at_least("random", "depth", target_depth, 1)?;
    let weights = cfg.weights();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(GeneratorError::BadProbabilities(
            "weights must be finite and >= 0".into(),
        ));
    }
    let all =
        WeightedIndex::new(weights).map_err(|e| GeneratorError::BadProbabilities(e.to_string()))?;
    let flat = WeightedIndex::new(&weights[..4])
        .map_err(|e| GeneratorError::BadProbabilities(format!("primitive draws: {e}")))?;
    let mut b = RandomBuilder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        n: n_qubits,
        cfg,
        all,
        flat,
    };
    let mut c = Circuit::new(
        format!("random_{n_qubits}_d{target_depth}_s{seed}"),
        n_qubits,
    );
    c.add_clbit_register("c", n_qubits);
    let mut written = BTreeSet::new();
    let cap = 64 * target_depth * n_qubits;
    while compute_layering(&c).depth < target_depth && c.body.len() < cap {
        let stmt = b.statement(0, &mut written);
        c.body.push(stmt);
    }
    Ok(c)
}

/// Benchmark family selector used by the CLI and sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Qpe,
    Iqpe,
    Vqe,
    Random,
    Rus,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Qpe,
        Family::Iqpe,
        Family::Vqe,
        Family::Random,
        Family::Rus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Qpe => "qpe",
            Family::Iqpe => "iqpe",
            Family::Vqe => "vqe",
            Family::Random => "random",
            Family::Rus => "rus",
        }
    }

    /// Default size ladder used by sweeps.
    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Family::Rus => (4..=48).step_by(4).collect(),
            Family::Qpe | Family::Iqpe | Family::Vqe => (2..=10).collect(),
            Family::Random => (4..=16).collect(),
        }
    }

    /// Spec for one ladder point. The random family uses depth = size.
    pub fn at_size(self, size: usize, seed: u64) -> GeneratorSpec {
        match self {
            Family::Qpe => GeneratorSpec::Qpe { n: size },
            Family::Iqpe => GeneratorSpec::Iqpe { iterations: size },
            Family::Vqe => GeneratorSpec::Vqe {
                n: size,
                layers: 2,
                iterations: 2,
            },
            Family::Random => GeneratorSpec::Random {
                n: size,
                depth: size,
                seed,
            },
            Family::Rus => GeneratorSpec::Rus { n: size },
        }
    }
}

impl FromStr for Family {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| GeneratorError::BadSpec {
                spec: s.to_string(),
                reason: "unknown family (expected qpe, iqpe, vqe, random or rus)".into(),
            })
    }
}

/// A generator invocation written as `name(arg=value,...)`, e.g. `rus(n=8)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    Qpe {
        n: usize,
    },
    Iqpe {
        iterations: usize,
    },
    Vqe {
        n: usize,
        layers: usize,
        iterations: usize,
    },
    Random {
        n: usize,
        depth: usize,
        seed: u64,
    },
    Rus {
        n: usize,
    },
}

impl GeneratorSpec {
    pub fn family(&self) -> Family {
        match self {
            GeneratorSpec::Qpe { .. } => Family::Qpe,
            GeneratorSpec::Iqpe { .. } => Family::Iqpe,
            GeneratorSpec::Vqe { .. } => Family::Vqe,
            GeneratorSpec::Random { .. } => Family::Random,
            GeneratorSpec::Rus { .. } => Family::Rus,
        }
    }

    /// The ladder coordinate of this spec (qubits, or iterations for IQPE).
    pub fn size(&self) -> usize {
        match self {
            GeneratorSpec::Qpe { n }
            | GeneratorSpec::Vqe { n, .. }
            | GeneratorSpec::Random { n, .. }
            | GeneratorSpec::Rus { n } => *n,
            GeneratorSpec::Iqpe { iterations } => *iterations,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            GeneratorSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<Circuit, GeneratorError> {
        match *self {
            GeneratorSpec::Qpe { n } => gen_qpe(n),
            GeneratorSpec::Iqpe { iterations } => gen_iqpe(iterations),
            GeneratorSpec::Vqe {
                n,
                layers,
                iterations,
            } => gen_vqe(n, layers, iterations),
            GeneratorSpec::Random { n, depth, seed } => gen_random_adaptive(n, depth, seed),
            GeneratorSpec::Rus { n } => gen_rus(n),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Qpe { n } => write!(f, "qpe(n={n})"),
            GeneratorSpec::Iqpe { iterations } => write!(f, "iqpe(iterations={iterations})"),
            GeneratorSpec::Vqe {
                n,
                layers,
                iterations,
            } => {
                write!(f, "vqe(n={n},layers={layers},iterations={iterations})")
            }
            GeneratorSpec::Random { n, depth, seed } => {
                write!(f, "random(n={n},depth={depth},seed={seed})")
            }
            GeneratorSpec::Rus { n } => write!(f, "rus(n={n})"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| GeneratorError::BadSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let s = s.trim();
        let (name, rest) = match s.find('(') {
            Some(i) => (&s[..i], &s[i + 1..]),
            None => (s, ")"),
        };
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| bad("missing closing parenthesis"))?;
        let family: Family = name.parse()?;
        let mut kv: Vec<(String, u64)> = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad("arguments must be written key=value"))?;
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| bad(&format!("`{}` is not a non-negative integer", v.trim())))?;
            kv.push((k.trim().to_string(), v));
        }
        let allowed: &[&str] = match family {
            Family::Qpe | Family::Rus => &["n"],
            Family::Iqpe => &["iterations", "iters"],
            Family::Vqe => &["n", "layers", "iterations", "iters"],
            Family::Random => &["n", "depth", "seed"],
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(bad(&format!(
                "unknown argument `{k}` for {}",
                family.name()
            )));
        }
        let get = |keys: &[&str]| {
            kv.iter()
                .find(|(k, _)| keys.contains(&k.as_str()))
                .map(|(_, v)| *v)
        };
        let need = |keys: &[&str]| {
            get(keys).ok_or_else(|| bad(&format!("missing argument `{}`", keys[0])))
        };
        let as_usize = |v: u64| usize::try_from(v).map_err(|_| bad("argument too large"));
        Ok(match family {
            Family::Qpe => GeneratorSpec::Qpe {
                n: as_usize(need(&["n"])?)?,
            },
            Family::Rus => GeneratorSpec::Rus {
                n: as_usize(need(&["n"])?)?,
            },
            Family::Iqpe => GeneratorSpec::Iqpe {
                iterations: as_usize(need(&["iterations", "iters"])?)?,
            },
            Family::Vqe => GeneratorSpec::Vqe {
                n: as_usize(need(&["n"])?)?,
                layers: as_usize(get(&["layers"]).unwrap_or(1))?,
                iterations: as_usize(get(&["iterations", "iters"]).unwrap_or(1))?,
            },
            Family::Random => {
                let n = as_usize(need(&["n"])?)?;
                GeneratorSpec::Random {
                    n,
                    depth: as_usize(get(&["depth"]).unwrap_or(10))?,
                    seed: get(&["seed"]).unwrap_or(0),
                }
            }
        })
    }
}

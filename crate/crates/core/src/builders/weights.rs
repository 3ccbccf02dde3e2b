use std::collections::BTreeMap;

use crate::circuit::{Circuit, Condition};

use super::BuildError;

/// How a measurement hyperedge is weighted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementImpact {
    /// Number of later statements guarded by the measured bit.
    DependentGateCount,
    Constant(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightModel {
    /// Base weight by gate arity; arities not listed use `default_base_weight`.
    pub base_gate_weight: BTreeMap<usize, f64>,
    pub default_base_weight: f64,
    pub measurement_impact: MeasurementImpact,
    /// Probability that one constrained bit matches its expected value.
    pub conditional_probability_default: f64,
    /// Keyed by normalized condition text such as `mid[0]==1` or `mid=="00"`.
    pub probability_overrides: BTreeMap<String, f64>,
    /// Extra factor for conditional edges inside `while` bodies.
    pub while_multiplier: f64,
}

impl Default for WeightModel {
    fn default() -> Self {
        WeightModel {
            base_gate_weight: BTreeMap::new(),
            default_base_weight: 1.0,
            measurement_impact: MeasurementImpact::DependentGateCount,
            conditional_probability_default: 0.5,
            probability_overrides: BTreeMap::new(),
            while_multiplier: 1.0,
        }
    }
}

/// Strips whitespace and expands the truthy form `reg[i]` to `reg[i]==1`.
pub fn normalize_pattern(pattern: &str) -> String {
    let p: String = pattern.chars().filter(|c| !c.is_whitespace()).collect();
    if !p.contains("==") && p.ends_with(']') && !p.starts_with('!') {
        format!("{p}==1")
    } else {
        p
    }
}

/// Splits `key = value` lines; `#` starts a comment. Returns
/// `(line number, key, value)`.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>, BuildError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        // Keys may contain `==`, so split on the last `=` that has a space
        // or nothing else after the key.
        let Some((k, v)) = split_assignment(line) else {
            return Err(BuildError::Config {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let bytes = line.as_bytes();
    // Last `=` not adjacent to another `=`.
    let mut idx = None;
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'=' {
            continue;
        }
        let prev = i > 0 && bytes[i - 1] == b'=';
        let next = i + 1 < bytes.len() && bytes[i + 1] == b'=';
        if !prev && !next {
            idx = Some(i);
        }
    }
    idx.map(|i| (&line[..i], &line[i + 1..]))
}

fn real(line: usize, key: &str, value: &str) -> Result<f64, BuildError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| BuildError::Config {
            line,
            message: format!("`{key}` expects a real number, found `{value}`"),
        })
}

impl WeightModel {
    pub fn base_weight(&self, arity: usize) -> f64 {
        self.base_gate_weight
            .get(&arity)
            .copied()
            .unwrap_or(self.default_base_weight)
    }

    /// Loads the documented keys from a key/value file. Keys under
    /// `partition.` are left for the caller.
    ///
    /// ```text
    /// base_weight.arity.2 = 1.5
    /// base_weight.default = 1.0
    /// measurement_impact = dependent   # or a constant such as 2.0
    /// p_default = 0.5
    /// p_override.mid[0]==1 = 0.9
    /// while_multiplier = 1.0
    /// ```
    pub fn from_config_str(text: &str) -> Result<WeightModel, BuildError> {
        let mut wm = WeightModel::default();
        for (line, key, value) in parse_key_values(text)? {
            if key.starts_with("partition.") {
                continue;
            }
            if let Some(arity) = key.strip_prefix("base_weight.arity.") {
                let arity: usize = arity.parse().map_err(|_| BuildError::Config {
                    line,
                    message: format!("bad arity in `{key}`"),
                })?;
                wm.base_gate_weight.insert(arity, real(line, &key, &value)?);
            } else if let Some(pattern) = key.strip_prefix("p_override.") {
                wm.probability_overrides
                    .insert(normalize_pattern(pattern), real(line, &key, &value)?);
            } else {
                match key.as_str() {
                    "base_weight.default" => wm.default_base_weight = real(line, &key, &value)?,
                    "p_default" => wm.conditional_probability_default = real(line, &key, &value)?,
                    "while_multiplier" => wm.while_multiplier = real(line, &key, &value)?,
                    "measurement_impact" => {
                        wm.measurement_impact = match value.as_str() {
                            "dependent" | "dependent_gate_count" => {
                                MeasurementImpact::DependentGateCount
                            }
                            v => MeasurementImpact::Constant(real(line, &key, v)?),
                        }
                    }
                    _ => {
                        return Err(BuildError::Config {
                            line,
                            message: format!("unknown key `{key}`"),
                        })
                    }
                }
            }
        }
        wm.validate()?;
        Ok(wm)
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        let bad = |message: String| Err(BuildError::Config { line: 0, message });
        let weights = self
            .base_gate_weight
            .values()
            .chain([&self.default_base_weight, &self.while_multiplier]);
        for w in weights {
            if !w.is_finite() || *w < 0.0 {
                return bad(format!("weights must be finite and >= 0, got {w}"));
            }
        }
        if let MeasurementImpact::Constant(w) = self.measurement_impact {
            if !w.is_finite() || w < 0.0 {
                return bad(format!("measurement_impact must be >= 0, got {w}"));
            }
        }
        let probs = self
            .probability_overrides
            .values()
            .chain([&self.conditional_probability_default]);
        for p in probs {
            if !(0.0..=1.0).contains(p) {
                return bad(format!("probabilities must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }
}

/// Execution probability of `cond`: an override when one matches its text,
/// else `p_default^bits` for register comparisons, `p_default` for single
/// bits, and `1 - p` for a negation.
pub fn estimate_condition_probability(
    cond: &Condition,
    circuit: &Circuit,
    wm: &WeightModel,
) -> f64 {
    let text = circuit.condition_text(cond);
    if let Some(p) = wm.probability_overrides.get(&text) {
        return *p;
    }
    let p = wm.conditional_probability_default;
    match cond {
        Condition::BitEquals { .. } => p,
        Condition::RegisterEquals { bits, .. } => p.powi(bits.len() as i32),
        Condition::Not { inner } => 1.0 - estimate_condition_probability(inner, circuit, wm),
    }
}

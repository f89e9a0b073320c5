//! Three-qubit GHZ state `(|000> + |111>)/sqrt(2)` measured with projective
//! qubit measurements in the X-Z plane. The only floating-point module.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::Radix;
use crate::inequality::{evaluate, InequalityError, LinearInequality, DEFAULT_TOLERANCE};
use crate::rational::Scalar;
use crate::resource::{Alphabet, ConditionalTable};

const IMPROVEMENT: f64 = 1e-12;

pub const PARTIES: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("strategy needs angles for exactly the parties A, B, C")]
    Parties,
    #[error("angle {0} is not finite")]
    NonFinite(f64),
    #[error("party `{0}` has no settings")]
    NoSettings(String),
    #[error("inequality is not over parties A, B, C")]
    Signature,
    #[error(transparent)]
    Inequality(#[from] InequalityError),
}

/// Observable `cos(t) Z + sin(t) X`; outcome position 0 is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub angle: f64,
}

impl MeasurementSetting {
    /// Eigenvector for outcome position `o` in the computational basis.
    pub fn eigenvector(&self, o: usize) -> [f64; 2] {
        let (s, c) = (self.angle / 2.0).sin_cos();
        if o == 0 {
            [c, s]
        } else {
            [-s, c]
        }
    }
}

/// Angles per party (A, B, C) and per setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumStrategy {
    pub angles: BTreeMap<String, Vec<f64>>,
}

impl QuantumStrategy {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, QuantumError> {
        let s = Self {
            angles: PARTIES
                .iter()
                .map(|p| p.to_string())
                .zip([a, b, c])
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        if self.angles.len() != 3 || PARTIES.iter().any(|p| !self.angles.contains_key(*p)) {
            return Err(QuantumError::Parties);
        }
        for (p, v) in &self.angles {
            if v.is_empty() {
                return Err(QuantumError::NoSettings(p.clone()));
            }
            if let Some(&bad) = v.iter().find(|a| !a.is_finite()) {
                return Err(QuantumError::NonFinite(bad));
            }
        }
        Ok(())
    }

    pub fn party(&self, p: &str) -> &[f64] {
        &self.angles[p]
    }

    fn settings(&self, p: &str, x: usize) -> MeasurementSetting {
        MeasurementSetting {
            angle: self.angles[p][x],
        }
    }
}

/// Outcome probabilities of the GHZ state under the strategy, as a table on
/// parties A, B, C with settings `0..k` and binary outcomes.
pub fn ghz_behavior(s: &QuantumStrategy) -> Result<ConditionalTable<f64>, QuantumError> {
    s.validate()?;
    let inputs: Vec<Alphabet> = PARTIES
        .iter()
        .map(|p| Alphabet::range(s.party(p).len()))
        .collect();
    let outputs = vec![Alphabet::range(2); 3];
    let table = ConditionalTable::from_fn(
        PARTIES.iter().map(|p| p.to_string()).collect(),
        inputs,
        outputs,
        |x, a| {
            let e: Vec<[f64; 2]> = (0..3)
                .map(|k| s.settings(PARTIES[k], x[k]).eigenvector(a[k]))
                .collect();
            let amp = (e[0][0] * e[1][0] * e[2][0] + e[0][1] * e[1][1] * e[2][1]) * FRAC_1_SQRT_2;
            amp * amp
        },
    )
    .map_err(InequalityError::from)?;
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Grid points per angle over `[0, 2 pi)`.
    pub grid: usize,
    /// Coordinate descent stops once the step falls below this.
    pub refine: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 16,
            refine: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub strategy: QuantumStrategy,
    /// Left-hand side evaluated on the GHZ probability table.
    pub value: f64,
}

/// Correlator terms compiled to angle-vector slots: `(coefficient, slot per
/// party or None)`.
struct Objective {
    terms: Vec<(f64, [Option<usize>; 3])>,
    offsets: [usize; 3],
    len: usize,
}

impl Objective {
    fn new(ineq: &LinearInequality) -> Result<Self, QuantumError> {
        let sig = ineq.signature();
        let mut pos = [0usize; 3];
        for (k, p) in PARTIES.iter().enumerate() {
            pos[k] = sig.index(p).ok_or(QuantumError::Signature)?;
        }
        if sig.parties.len() != 3 {
            return Err(QuantumError::Signature);
        }
        let counts: [usize; 3] = pos.map(|i| sig.settings[i]);
        let offsets = [0, counts[0], counts[0] + counts[1]];
        let len = counts.iter().sum();
        let terms = ineq
            .terms()
            .iter()
            .map(|t| {
                let mut slots = [None; 3];
                for (p, x) in &t.factors {
                    let k = PARTIES
                        .iter()
                        .position(|q| q == p)
                        .expect("checked parties");
                    slots[k] = Some(offsets[k] + x);
                }
                (t.coefficient.to_f64(), slots)
            })
            .collect();
        Ok(Self {
            terms,
            offsets,
            len,
        })
    }

    /// `sum_t c_t <psi| O_A O_B O_C |psi>` with identity for absent parties.
    /// Only the `|000>` and `|111>` amplitudes are nonzero, so each
    /// expectation is half the sum over `i, j` of the products of the
    /// `(i, j)` matrix entries.
    fn value(&self, cs: &[(f64, f64)]) -> f64 {
        let mut total = 0.0;
        for (coef, slots) in &self.terms {
            let mut m = [1.0f64, 1.0, 1.0, 1.0];
            for slot in slots {
                let entries = match slot {
                    Some(i) => {
                        let (c, s) = cs[*i];
                        [c, s, s, -c]
                    }
                    None => [1.0, 0.0, 0.0, 1.0],
                };
                for k in 0..4 {
                    m[k] *= entries[k];
                }
            }
            total += coef * 0.5 * (m[0] + m[1] + m[2] + m[3]);
        }
        total
    }

    fn strategy(&self, angles: &[f64]) -> QuantumStrategy {
        let ends = [self.offsets[1], self.offsets[2], self.len];
        let parts: Vec<Vec<f64>> = (0..3)
            .map(|k| angles[self.offsets[k]..ends[k]].to_vec())
            .collect();
        QuantumStrategy {
            angles: PARTIES.iter().map(|p| p.to_string()).zip(parts).collect(),
        }
    }
}

/// Largest left-hand side found for GHZ measurements: exhaustive grid, then
/// coordinate descent with halving steps. Deterministic for a fixed
/// configuration.
pub fn search_max_violation(
    ineq: &LinearInequality,
    config: &SearchConfig,
) -> Result<SearchResult, QuantumError> {
    let obj = Objective::new(ineq)?;
    let n = obj.len;
    let g = config.grid.max(1);
    let step0 = 2.0 * PI / g as f64;
    let table: Vec<(f64, f64)> = (0..g)
        .map(|k| ((k as f64 * step0).cos(), (k as f64 * step0).sin()))
        .collect();
    let radix = Radix::new(vec![g; n]);
    let best = (0..radix.count())
        .into_par_iter()
        .with_min_len(4096)
        .map_init(
            || (vec![0usize; n], vec![(0.0, 0.0); n]),
            |(digits, cs), idx| {
                let mut i = idx;
                radix.decode_into(&mut i, digits);
                for (c, &d) in cs.iter_mut().zip(digits.iter()) {
                    *c = table[d];
                }
                (obj.value(cs), idx)
            },
        )
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                // Larger value wins; ties go to the smaller index, which is the
                // lexicographically smaller grid point.
                match b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal) {
                    Ordering::Greater => b,
                    Ordering::Less => a,
                    Ordering::Equal => {
                        if a.1 <= b.1 {
                            a
                        } else {
                            b
                        }
                    }
                }
            },
        );
    let start = radix.decode(best.1);
    let mut angles: Vec<f64> = start.iter().map(|&d| d as f64 * step0).collect();
    let eval = |a: &[f64]| {
        let cs: Vec<(f64, f64)> = a.iter().map(|t| (t.cos(), t.sin())).collect();
        obj.value(&cs)
    };
    let mut current = eval(&angles);
    let mut step = step0 / 2.0;
    while step >= config.refine {
        let mut improved = false;
        for i in 0..n {
            for delta in [step, -step] {
                let mut trial = angles.clone();
                trial[i] = (trial[i] + delta).rem_euclid(2.0 * PI);
                let v = eval(&trial);
                // Gains below rounding noise do not count as progress.
                if v > current + IMPROVEMENT {
                    angles = trial;
                    current = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let strategy = obj.strategy(&angles);
    let value = evaluate_strategy(ineq, &strategy)?;
    Ok(SearchResult { strategy, value })
}

/// Left-hand side of `ineq` on the GHZ table of `s`.
pub fn evaluate_strategy(
    ineq: &LinearInequality,
    s: &QuantumStrategy,
) -> Result<f64, QuantumError> {
    let b = ghz_behavior(s)?;
    Ok(evaluate(ineq, &b, DEFAULT_TOLERANCE)?.value)
}

/// Left-hand side from GHZ observables directly, without the table.
pub fn observable_value(ineq: &LinearInequality, s: &QuantumStrategy) -> Result<f64, QuantumError> {
    s.validate()?;
    let obj = Objective::new(ineq)?;
    let mut cs = Vec::with_capacity(obj.len);
    for p in PARTIES {
        cs.extend(s.party(p).iter().map(|t| (t.cos(), t.sin())));
    }
    if cs.len() != obj.len {
        return Err(QuantumError::Inequality(InequalityError::Signature(
            "strategy settings do not match the inequality".into(),
        )));
    }
    Ok(obj.value(&cs))
}

/// Stored search outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub inequality: String,
    pub angles: BTreeMap<String, Vec<f64>>,
    pub value: f64,
}

impl StrategyFile {
    pub fn strategy(&self) -> Result<QuantumStrategy, QuantumError> {
        let s = QuantumStrategy {
            angles: self.angles.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests;

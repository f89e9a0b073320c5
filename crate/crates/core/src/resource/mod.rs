//! Multiparty nonsignaling resources stored as exact conditional tables.

mod json;
mod table;

use std::collections::BTreeMap;
use std::ops::Deref;

use num_traits::{One, Zero};
use thiserror::Error;

pub use json::ResourceFile;
pub use table::{Alphabet, ConditionalTable, SignalingWitness};

use crate::rational::{format_rational, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResourceError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("symbol {0} appears twice in an alphabet")]
    DuplicateSymbol(u32),
    #[error("resource has no parties")]
    NoParties,
    #[error("party `{0}` appears twice")]
    DuplicateParty(String),
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error("malformed table: {0}")]
    Shape(String),
    #[error("missing table entry for inputs {0:?}")]
    MissingInputs(Vec<u32>),
    #[error("symbol {symbol} is not in the alphabet of party `{party}`")]
    SymbolOutOfAlphabet { party: String, symbol: u32 },
    #[error("negative entry {value} at inputs {inputs:?}, outputs {outputs:?}")]
    Negative {
        inputs: Vec<u32>,
        outputs: Vec<u32>,
        value: String,
    },
    #[error("entries for inputs {inputs:?} sum to {sum}, not 1")]
    NotNormalized { inputs: Vec<u32>, sum: String },
    #[error("{0}")]
    Signaling(Box<SignalingWitness<Rational>>),
    #[error("party set is empty")]
    EmptyPartySet,
    #[error("party sets overlap at `{0}`")]
    Overlap(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvent,
    #[error("function for party `{party}` is undefined at input {input}")]
    PartialFunction { party: String, input: u32 },
    #[error("tables have different party/alphabet signatures")]
    SignatureMismatch,
    #[error("mixture weights must be positive and sum to 1")]
    BadWeights,
    #[error("invalid fraction: {0}")]
    Fraction(String),
}

/// Exact multiparty resource `R(a|x)`.
///
/// Resources built through the checked constructors are normalized and pass
/// [`NonsignalingResource::validate_nonsignaling`]; [`NonsignalingResource::new_unchecked`]
/// skips the nonsignaling check and marks the resource as unverified, which
/// downstream computations refuse by default.
#[derive(Debug, Clone, PartialEq)]
pub struct NonsignalingResource {
    id: String,
    table: ConditionalTable<Rational>,
    verified: bool,
}

impl Deref for NonsignalingResource {
    type Target = ConditionalTable<Rational>;

    fn deref(&self) -> &Self::Target {
        &self.table
    }
}

impl NonsignalingResource {
    pub fn from_table(
        id: impl Into<String>,
        table: ConditionalTable<Rational>,
    ) -> Result<Self, ResourceError> {
        let r = Self {
            id: id.into(),
            table,
            verified: false,
        };
        r.validate_nonsignaling()?;
        Ok(Self {
            verified: true,
            ..r
        })
    }

    pub fn new(
        id: impl Into<String>,
        parties: Vec<String>,
        inputs: Vec<Alphabet>,
        outputs: Vec<Alphabet>,
        data: Vec<Rational>,
    ) -> Result<Self, ResourceError> {
        Self::from_table(
            id,
            ConditionalTable::from_data(parties, inputs, outputs, data)?,
        )
    }

    /// Shape-checked only. Used for signaling counterexamples.
    pub fn new_unchecked(id: impl Into<String>, table: ConditionalTable<Rational>) -> Self {
        Self {
            id: id.into(),
            table,
            verified: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn table(&self) -> &ConditionalTable<Rational> {
        &self.table
    }

    pub fn into_table(self) -> ConditionalTable<Rational> {
        self.table
    }

    /// True when construction ran the nonsignaling validator successfully.
    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Normalization first, then the single-party nonsignaling conditions.
    pub fn validate_nonsignaling(&self) -> Result<(), ResourceError> {
        self.table.check_normalized(0.0)?;
        self.table
            .validate_nonsignaling(0.0)
            .map_err(|w| ResourceError::Signaling(Box::new(w)))
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>, ResourceError> {
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let i = self
                .party_index(name)
                .ok_or_else(|| ResourceError::UnknownParty(name.to_string()))?;
            if out.contains(&i) {
                return Err(ResourceError::DuplicateParty(name.to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Receivers' marginal must not depend on the signalers' inputs.
    pub fn check_subset_nonsignaling(
        &self,
        signalers: &[&str],
        receivers: &[&str],
    ) -> Result<(), ResourceError> {
        self.table.check_normalized(0.0)?;
        let s = self.positions(signalers)?;
        let r = self.positions(receivers)?;
        if s.is_empty() || r.is_empty() {
            return Err(ResourceError::EmptyPartySet);
        }
        if let Some(&i) = s.iter().find(|i| r.contains(i)) {
            return Err(ResourceError::Overlap(self.parties()[i].clone()));
        }
        let mut r_sorted = r;
        r_sorted.sort_unstable();
        self.table
            .check_subset_nonsignaling(&s, &r_sorted, 0.0)
            .map_err(|w| ResourceError::Signaling(Box::new(w)))
    }

    fn ensure_nonsignaling(&self) -> Result<(), ResourceError> {
        if self.verified {
            Ok(())
        } else {
            self.validate_nonsignaling()
        }
    }

    /// Reduced resource on `keep`, dropped inputs fixed at their first symbol.
    /// Party order follows the original resource.
    pub fn marginal(&self, keep: &[&str]) -> Result<NonsignalingResource, ResourceError> {
        self.ensure_nonsignaling()?;
        let mut k = self.positions(keep)?;
        if k.is_empty() {
            return Err(ResourceError::EmptyPartySet);
        }
        k.sort_unstable();
        let table = self.table.marginal_first(&k)?;
        Ok(Self {
            id: self.id.clone(),
            table,
            verified: true,
        })
    }

    /// Marginal on `keep` with explicit dropped inputs (symbols, in the
    /// original party order of the dropped parties).
    pub fn marginal_with_inputs(
        &self,
        keep: &[&str],
        dropped_inputs: &[u32],
    ) -> Result<ConditionalTable<Rational>, ResourceError> {
        let mut k = self.positions(keep)?;
        k.sort_unstable();
        let dropped: Vec<usize> = (0..self.party_count()).filter(|i| !k.contains(i)).collect();
        if dropped.len() != dropped_inputs.len() {
            return Err(ResourceError::Shape(
                "wrong number of dropped inputs".into(),
            ));
        }
        let pos = dropped
            .iter()
            .zip(dropped_inputs)
            .map(|(&d, &s)| self.symbol_position(d, s, true))
            .collect::<Result<Vec<_>, _>>()?;
        self.table.marginal_fixing(&k, &pos)
    }

    fn symbol_position(
        &self,
        party: usize,
        symbol: u32,
        input: bool,
    ) -> Result<usize, ResourceError> {
        let alphabet = if input {
            &self.input_alphabets()[party]
        } else {
            &self.output_alphabets()[party]
        };
        alphabet
            .index_of(symbol)
            .ok_or_else(|| ResourceError::SymbolOutOfAlphabet {
                party: self.parties()[party].clone(),
                symbol,
            })
    }

    /// `R(a_p | x_p, x_q, a_q)` for the parties not in `observed`.
    pub fn condition(
        &self,
        observed: &[&str],
        outputs: &[u32],
        inputs: &[u32],
    ) -> Result<NonsignalingResource, ResourceError> {
        self.ensure_nonsignaling()?;
        let q = self.positions(observed)?;
        if q.len() != outputs.len() || q.len() != inputs.len() {
            return Err(ResourceError::Shape(
                "observed parties, outputs and inputs must have equal length".into(),
            ));
        }
        let n = self.party_count();
        let p: Vec<usize> = (0..n).filter(|i| !q.contains(i)).collect();
        if p.is_empty() {
            return Err(ResourceError::EmptyPartySet);
        }
        let mut xq = vec![0usize; n];
        let mut aq = vec![0usize; n];
        for (k, &i) in q.iter().enumerate() {
            xq[i] = self.symbol_position(i, inputs[k], true)?;
            aq[i] = self.symbol_position(i, outputs[k], false)?;
        }
        let mut q_sorted = q.clone();
        q_sorted.sort_unstable();
        let reduced = self.table.marginal_fixing(&q_sorted, &vec![0; p.len()])?;
        let q_in: Vec<usize> = q_sorted.iter().map(|&i| xq[i]).collect();
        let q_out: Vec<usize> = q_sorted.iter().map(|&i| aq[i]).collect();
        let denom = reduced.get(&q_in, &q_out).clone();
        if denom.is_zero() {
            return Err(ResourceError::ZeroProbabilityEvent);
        }
        let parties = p.iter().map(|&i| self.parties()[i].clone()).collect();
        let ins = p
            .iter()
            .map(|&i| self.input_alphabets()[i].clone())
            .collect();
        let outs = p
            .iter()
            .map(|&i| self.output_alphabets()[i].clone())
            .collect();
        let mut full_x = xq.clone();
        let mut full_a = aq.clone();
        let table = ConditionalTable::from_fn(parties, ins, outs, |x, a| {
            for (k, &i) in p.iter().enumerate() {
                full_x[i] = x[k];
                full_a[i] = a[k];
            }
            self.table.get(&full_x, &full_a).clone() / denom.clone()
        })?;
        Self::from_table(self.id.clone(), table)
    }

    /// Product resource over the union of the two party lists.
    pub fn tensor(
        &self,
        other: &NonsignalingResource,
        id: impl Into<String>,
    ) -> Result<Self, ResourceError> {
        Self::from_table(id, self.table.tensor(&other.table)?)
    }

    /// Convex combination of resources with a common signature.
    pub fn mixture(
        id: impl Into<String>,
        components: &[(Rational, &NonsignalingResource)],
    ) -> Result<Self, ResourceError> {
        let total: Rational = components.iter().map(|(w, _)| w.clone()).sum();
        if components.iter().any(|(w, _)| w < &Rational::zero()) || !total.is_one() {
            return Err(ResourceError::BadWeights);
        }
        let t = ConditionalTable::linear_combination(
            components.iter().map(|(w, r)| (w.clone(), &r.table)),
        )?;
        Self::from_table(id, t)
    }

    /// True if every party has a single input symbol.
    pub fn is_input_free(&self) -> bool {
        self.input_alphabets().iter().all(|a| a.len() == 1)
    }

    /// Per-party output position for each input position when the resource is
    /// a product of Kronecker deltas, `None` otherwise.
    pub fn as_local_deterministic(&self) -> Option<Vec<Vec<usize>>> {
        let n = self.party_count();
        let mut funcs = Vec::with_capacity(n);
        for i in 0..n {
            let m = self.table.marginal_first(&[i]).ok()?;
            let mut f = Vec::with_capacity(self.input_alphabets()[i].len());
            for x in 0..m.input_count() {
                f.push(m.column(x).iter().position(|v| v.is_one())?);
            }
            funcs.push(f);
        }
        let ir = self.input_radix().clone();
        for (xi, x) in ir.iter().enumerate() {
            let a: Vec<usize> = (0..n).map(|i| funcs[i][x[i]]).collect();
            if !self.entry(xi, self.output_radix().encode(&a)).is_one() {
                return None;
            }
        }
        Some(funcs)
    }

    /// Resource with an extra "unused" input for `party`: on that input the
    /// party's output is a fresh symbol with certainty and the other parties
    /// see their marginal. Returns the resource and the fresh symbols
    /// `(input, output)`.
    pub fn with_unused_input(&self, party: &str) -> Result<(Self, u32, u32), ResourceError> {
        self.ensure_nonsignaling()?;
        let j = self
            .party_index(party)
            .ok_or_else(|| ResourceError::UnknownParty(party.to_string()))?;
        let bot_in = self.input_alphabets()[j].fresh_symbol();
        let bot_out = self.output_alphabets()[j].fresh_symbol();
        let mut inputs = self.input_alphabets().to_vec();
        let mut outputs = self.output_alphabets().to_vec();
        inputs[j] = inputs[j].with_symbol(bot_in)?;
        outputs[j] = outputs[j].with_symbol(bot_out)?;
        let old_in = self.input_alphabets()[j].len();
        let old_out = self.output_alphabets()[j].len();
        let n = self.party_count();
        let rest: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        let rest_marg = if rest.is_empty() {
            None
        } else {
            Some(self.table.marginal_first(&rest)?)
        };
        let table = ConditionalTable::from_fn(self.parties().to_vec(), inputs, outputs, |x, a| {
            match (x[j] == old_in, a[j] == old_out) {
                (false, false) => self.table.get(x, a).clone(),
                (false, true) | (true, false) => Rational::zero(),
                (true, true) => match &rest_marg {
                    None => Rational::one(),
                    Some(m) => {
                        let rx: Vec<usize> = rest.iter().map(|&i| x[i]).collect();
                        let ra: Vec<usize> = rest.iter().map(|&i| a[i]).collect();
                        m.get(&rx, &ra).clone()
                    }
                },
            }
        })?;
        Ok((Self::from_table(self.id.clone(), table)?, bot_in, bot_out))
    }

    /// Same resource with parties renamed.
    pub fn renamed_parties(&self, names: Vec<String>) -> Result<Self, ResourceError> {
        Ok(Self {
            id: self.id.clone(),
            table: self.table.clone().with_parties(names)?,
            verified: self.verified,
        })
    }

    /// Rendered probability at symbol tuples, for diagnostics.
    pub fn prob_string(&self, inputs: &[u32], outputs: &[u32]) -> Option<String> {
        self.prob(inputs, outputs).map(format_rational)
    }
}

fn names(parties: &[&str]) -> Vec<String> {
    parties.iter().map(|s| s.to_string()).collect()
}

/// `R(a|x) = prod_i delta(a_i, f_i(x_i))`. `functions[i]` maps input symbols
/// of party `i` to output symbols.
pub fn make_local_deterministic(
    id: impl Into<String>,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
    functions: &[BTreeMap<u32, u32>],
) -> Result<NonsignalingResource, ResourceError> {
    if functions.len() != parties.len() {
        return Err(ResourceError::Shape(
            "one function per party required".into(),
        ));
    }
    let mut pos = Vec::with_capacity(parties.len());
    for (i, f) in functions.iter().enumerate() {
        let mut g = Vec::with_capacity(inputs[i].len());
        for &x in inputs[i].symbols() {
            let a = *f.get(&x).ok_or_else(|| ResourceError::PartialFunction {
                party: parties[i].to_string(),
                input: x,
            })?;
            g.push(
                outputs[i]
                    .index_of(a)
                    .ok_or_else(|| ResourceError::SymbolOutOfAlphabet {
                        party: parties[i].to_string(),
                        symbol: a,
                    })?,
            );
        }
        pos.push(g);
    }
    let table =
        ConditionalTable::from_fn(names(parties), inputs.to_vec(), outputs.to_vec(), |x, a| {
            if (0..x.len()).all(|i| pos[i][x[i]] == a[i]) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })?;
    NonsignalingResource::from_table(id, table)
}

/// Input-free resource with the given joint output distribution. Output
/// tuples absent from `distribution` get probability zero.
pub fn make_shared_randomness(
    id: impl Into<String>,
    parties: &[&str],
    outputs: &[Alphabet],
    distribution: &BTreeMap<Vec<u32>, Rational>,
) -> Result<NonsignalingResource, ResourceError> {
    let inputs = vec![Alphabet::range(1); parties.len()];
    let mut data = vec![Rational::zero(); outputs.iter().map(Alphabet::len).product()];
    let radix = crate::index::Radix::new(outputs.iter().map(Alphabet::len).collect());
    for (tuple, p) in distribution {
        if tuple.len() != parties.len() {
            return Err(ResourceError::Shape(format!(
                "output tuple {tuple:?} has wrong length"
            )));
        }
        let idx: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                outputs[i]
                    .index_of(s)
                    .ok_or_else(|| ResourceError::SymbolOutOfAlphabet {
                        party: parties[i].to_string(),
                        symbol: s,
                    })
            })
            .collect::<Result<_, _>>()?;
        data[radix.encode(&idx)] = p.clone();
    }
    NonsignalingResource::new(id, names(parties), inputs, outputs.to_vec(), data)
}

/// Uniform output distribution for every input tuple.
pub fn make_uniform(
    id: impl Into<String>,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
) -> Result<NonsignalingResource, ResourceError> {
    let count: usize = outputs.iter().map(Alphabet::len).product();
    let p = ratio(1, count as i64);
    let table =
        ConditionalTable::from_fn(names(parties), inputs.to_vec(), outputs.to_vec(), |_, _| {
            p.clone()
        })?;
    NonsignalingResource::from_table(id, table)
}

/// Binary-input/output box with `a xor b = x*y xor alpha*x xor beta*y xor gamma`
/// holding with probability one (each allowed pair has probability 1/2).
pub fn make_pr_class_box(
    id: impl Into<String>,
    parties: [&str; 2],
    alpha: u8,
    beta: u8,
    gamma: u8,
) -> NonsignalingResource {
    let bin = Alphabet::range(2);
    let half = ratio(1, 2);
    let table = ConditionalTable::from_fn(
        names(&parties),
        vec![bin.clone(), bin.clone()],
        vec![bin.clone(), bin],
        |x, a| {
            let (x, y) = (x[0] as u8, x[1] as u8);
            let rhs = (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma;
            if (a[0] as u8 ^ a[1] as u8) == (rhs & 1) {
                half.clone()
            } else {
                Rational::zero()
            }
        },
    )
    .expect("fixed shape");
    NonsignalingResource::from_table(id, table).expect("PR-class boxes are nonsignaling")
}

/// The PR box between parties `A` and `B`.
pub fn make_pr_box() -> NonsignalingResource {
    make_pr_class_box("PR", ["A", "B"], 0, 0, 0)
}

/// `v * PR + (1 - v) * uniform` on parties `A`, `B`.
pub fn make_noisy_pr_box(v: &Rational) -> Result<NonsignalingResource, ResourceError> {
    let pr = make_pr_box();
    let bin = Alphabet::range(2);
    let u = make_uniform(
        "U",
        &["A", "B"],
        &[bin.clone(), bin.clone()],
        &[bin.clone(), bin],
    )?;
    NonsignalingResource::mixture("noisy-PR", &[(v.clone(), &pr), (Rational::one() - v, &u)])
}

/// Generalized PR-type box: outputs uniform over tuples with
/// `sum_i a_i = f(x) (mod d)`, where `d` is the smallest output alphabet
/// size. Larger output alphabets are padded with zero-probability symbols.
pub fn make_modular_box(
    id: impl Into<String>,
    parties: &[&str],
    inputs: &[Alphabet],
    outputs: &[Alphabet],
    f: impl Fn(&[usize]) -> usize,
) -> Result<NonsignalingResource, ResourceError> {
    let d = outputs.iter().map(Alphabet::len).min().unwrap_or(1);
    let n = parties.len();
    let p = ratio(1, (d as i64).pow(n.saturating_sub(1) as u32));
    let table =
        ConditionalTable::from_fn(names(parties), inputs.to_vec(), outputs.to_vec(), |x, a| {
            if a.iter().any(|&ai| ai >= d) {
                return Rational::zero();
            }
            let s: usize = a.iter().sum();
            if s % d == f(x) % d {
                p.clone()
            } else {
                Rational::zero()
            }
        })?;
    NonsignalingResource::from_table(id, table)
}

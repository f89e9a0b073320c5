//! Correlators and linear correlator inequalities for two-outcome behaviors.
//!
//! Outcome position 0 of every party counts as `+1` and position 1 as `-1`.
//! Settings are positions in each party's input alphabet.

mod chain;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

pub use chain::{
    deterministic_behaviors, verify_derivation_chain, verify_derivation_chain_with,
    DerivationReport, StatedForms, StepResult, Witness,
};

use crate::index::Radix;
use crate::rational::{int, ratio, Rational, Scalar};
use crate::resource::{Alphabet, ConditionalTable, ResourceError, SignalingWitness};

/// Float tolerance used when evaluating floating-point behaviors.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("behavior signals, so marginals are ambiguous: {0}")]
    Signaling(String),
    #[error("behavior does not match the inequality signature: {0}")]
    Signature(String),
    #[error("bad term: {0}")]
    Term(String),
}

/// Party names with the number of settings of each.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub parties: Vec<String>,
    pub settings: Vec<usize>,
}

impl Signature {
    pub fn new(parties: &[&str], settings: &[usize]) -> Self {
        assert_eq!(
            parties.len(),
            settings.len(),
            "one settings count per party"
        );
        Self {
            parties: parties.iter().map(|s| s.to_string()).collect(),
            settings: settings.to_vec(),
        }
    }

    /// Three parties A, B, C with two settings each.
    pub fn tripartite_222() -> Self {
        Self::new(&["A", "B", "C"], &[2, 2, 2])
    }

    /// Three parties with a third setting for B.
    pub fn tripartite_232() -> Self {
        Self::new(&["A", "B", "C"], &[2, 3, 2])
    }

    pub fn index(&self, party: &str) -> Option<usize> {
        self.parties.iter().position(|p| p == party)
    }

    /// Input and binary output alphabets matching the signature.
    pub fn alphabets(&self) -> (Vec<Alphabet>, Vec<Alphabet>) {
        (
            self.settings.iter().map(|&k| Alphabet::range(k)).collect(),
            vec![Alphabet::range(2); self.parties.len()],
        )
    }

    /// Checks that `b` has exactly these parties (in any order), these
    /// settings counts and binary outputs.
    pub fn check<T>(&self, b: &ConditionalTable<T>) -> Result<(), InequalityError>
    where
        T: Scalar,
    {
        if b.party_count() != self.parties.len() {
            return Err(InequalityError::Signature(format!(
                "{} parties, expected {}",
                b.party_count(),
                self.parties.len()
            )));
        }
        for (p, &k) in self.parties.iter().zip(&self.settings) {
            let j = b
                .party_index(p)
                .ok_or_else(|| InequalityError::Signature(format!("no party `{p}`")))?;
            if b.input_alphabets()[j].len() != k {
                return Err(InequalityError::Signature(format!(
                    "party `{p}` has {} settings, expected {k}",
                    b.input_alphabets()[j].len()
                )));
            }
            if b.output_alphabets()[j].len() != 2 {
                return Err(InequalityError::Signature(format!(
                    "party `{p}` does not have two outcomes"
                )));
            }
        }
        Ok(())
    }
}

/// `coefficient * <prod_p O_p(setting_p)>` over a set of parties.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CorrelatorTerm {
    #[serde(with = "crate::rational::as_fraction")]
    pub coefficient: Rational,
    /// (party, setting) pairs with distinct parties.
    pub factors: Vec<(String, usize)>,
}

impl CorrelatorTerm {
    pub fn new(coefficient: Rational, factors: &[(&str, usize)]) -> Self {
        Self {
            coefficient,
            factors: factors.iter().map(|(p, s)| (p.to_string(), *s)).collect(),
        }
    }

    /// Factors sorted by party position in `sig`, for comparing supports.
    fn support(&self, sig: &Signature) -> Vec<(usize, usize)> {
        let mut s: Vec<(usize, usize)> = self
            .factors
            .iter()
            .map(|(p, k)| (sig.index(p).unwrap_or(usize::MAX), *k))
            .collect();
        s.sort();
        s
    }

    pub fn render(&self) -> String {
        let body: String = self
            .factors
            .iter()
            .map(|(p, s)| format!("{p}{s}"))
            .collect();
        format!(
            "{}<{body}>",
            crate::rational::format_rational(&self.coefficient)
        )
    }
}

/// `sum_t c_t <...>_t <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearInequality {
    pub name: String,
    signature: Signature,
    terms: Vec<CorrelatorTerm>,
    #[serde(with = "crate::rational::as_fraction")]
    bound: Rational,
}

impl LinearInequality {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        terms: Vec<CorrelatorTerm>,
        bound: Rational,
    ) -> Result<Self, InequalityError> {
        for t in &terms {
            if t.factors.is_empty() {
                return Err(InequalityError::Term("term without parties".into()));
            }
            for (i, (p, s)) in t.factors.iter().enumerate() {
                let j = signature
                    .index(p)
                    .ok_or_else(|| InequalityError::Term(format!("unknown party `{p}`")))?;
                if *s >= signature.settings[j] {
                    return Err(InequalityError::Term(format!(
                        "setting {s} out of range for `{p}`"
                    )));
                }
                if t.factors[..i].iter().any(|(q, _)| q == p) {
                    return Err(InequalityError::Term(format!(
                        "party `{p}` appears twice in a term"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            signature,
            terms,
            bound,
        })
    }

    /// No terms, bound zero.
    pub fn zero(signature: Signature) -> Self {
        Self {
            name: "zero".into(),
            signature,
            terms: Vec::new(),
            bound: Rational::zero(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn terms(&self) -> &[CorrelatorTerm] {
        &self.terms
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn coefficients(&self) -> Vec<Rational> {
        self.terms.iter().map(|t| t.coefficient.clone()).collect()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Multiplies coefficients and bound by a positive factor.
    pub fn scaled(&self, k: &Rational) -> Self {
        assert!(
            *k > Rational::zero(),
            "scaling by a non-positive factor flips the inequality"
        );
        Self {
            name: self.name.clone(),
            signature: self.signature.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| CorrelatorTerm {
                    coefficient: &t.coefficient * k,
                    factors: t.factors.clone(),
                })
                .collect(),
            bound: &self.bound * k,
        }
    }

    pub fn render(&self) -> String {
        let lhs: Vec<String> = self.terms.iter().map(CorrelatorTerm::render).collect();
        format!(
            "{} <= {}",
            lhs.join(" + "),
            crate::rational::format_rational(&self.bound)
        )
    }
}

fn sign(pos: usize) -> i32 {
    if pos == 0 {
        1
    } else {
        -1
    }
}

fn check_nonsignaling<T: Scalar>(b: &ConditionalTable<T>, tol: f64) -> Result<(), InequalityError> {
    b.validate_nonsignaling(tol)
        .map_err(|w: SignalingWitness<T>| InequalityError::Signaling(w.to_string()))
}

fn positions<T: Scalar>(
    b: &ConditionalTable<T>,
    factors: &[(String, usize)],
) -> Result<Vec<(usize, usize)>, InequalityError> {
    let mut pos = Vec::with_capacity(factors.len());
    for (p, s) in factors {
        let j = b
            .party_index(p)
            .ok_or_else(|| InequalityError::Signature(format!("no party `{p}`")))?;
        if *s >= b.input_alphabets()[j].len() {
            return Err(InequalityError::Signature(format!(
                "setting {s} out of range for `{p}`"
            )));
        }
        if b.output_alphabets()[j].len() != 2 {
            return Err(InequalityError::Signature(format!(
                "party `{p}` does not have two outcomes"
            )));
        }
        pos.push((j, *s));
    }
    pos.sort();
    if pos.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(InequalityError::Term("a party appears twice".into()));
    }
    Ok(pos)
}

/// Correlator from the marginal on the involved parties, with every other
/// party's input at its first setting. Assumes `b` is nonsignaling.
fn correlator_unchecked<T: Scalar>(
    b: &ConditionalTable<T>,
    pos: &[(usize, usize)],
) -> Result<T, InequalityError> {
    let keep: Vec<usize> = pos.iter().map(|&(j, _)| j).collect();
    let dropped = b.party_count() - keep.len();
    let m = b.marginal_fixing(&keep, &vec![0; dropped])?;
    let x: Vec<usize> = pos.iter().map(|&(_, s)| s).collect();
    let col = m.column(m.input_radix().encode(&x));
    let radix = m.output_radix();
    let mut total = T::zero();
    for (a, v) in col.iter().enumerate() {
        let s: i32 = radix.decode(a).iter().map(|&d| sign(d)).product();
        if s > 0 {
            total = total + v.clone();
        } else {
            total = total - v.clone();
        }
    }
    Ok(total)
}

/// `<prod_p O_p(x_p)>` for the given (party, setting) pairs: probability of
/// product `+1` minus probability of product `-1`. Refuses signaling
/// behaviors.
pub fn correlator<T: Scalar>(
    b: &ConditionalTable<T>,
    factors: &[(&str, usize)],
    tol: f64,
) -> Result<T, InequalityError> {
    check_nonsignaling(b, tol)?;
    let f: Vec<(String, usize)> = factors.iter().map(|(p, s)| (p.to_string(), *s)).collect();
    correlator_unchecked(b, &positions(b, &f)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub satisfied: bool,
}

fn leq<T: Scalar>(value: &T, bound: &Rational, tol: f64) -> bool {
    if T::EXACT {
        *value <= T::from_rational(bound)
    } else {
        value.to_f64() <= bound_f64(bound) + tol
    }
}

fn geq<T: Scalar>(value: &T, bound: &Rational, tol: f64) -> bool {
    if T::EXACT {
        *value >= T::from_rational(bound)
    } else {
        value.to_f64() >= bound_f64(bound) - tol
    }
}

fn bound_f64(r: &Rational) -> f64 {
    <f64 as Scalar>::from_rational(r)
}

fn coefficient<T: Scalar>(c: &Rational) -> T {
    T::from_rational(c)
}

/// Value of the left-hand side on `b` and whether it is within the bound.
/// Float behaviors use `tol` for the nonsignaling check and the comparison.
pub fn evaluate<T: Scalar>(
    ineq: &LinearInequality,
    b: &ConditionalTable<T>,
    tol: f64,
) -> Result<Evaluation<T>, InequalityError> {
    ineq.signature.check(b)?;
    check_nonsignaling(b, tol)?;
    let value = lhs_unchecked(ineq, b)?;
    let satisfied = leq(&value, &ineq.bound, tol);
    Ok(Evaluation { value, satisfied })
}

fn lhs_unchecked<T: Scalar>(
    ineq: &LinearInequality,
    b: &ConditionalTable<T>,
) -> Result<T, InequalityError> {
    let mut value = T::zero();
    for t in &ineq.terms {
        let c = correlator_unchecked(b, &positions(b, &t.factors)?)?;
        value = value + coefficient::<T>(&t.coefficient) * c;
    }
    Ok(value)
}

fn term(c: i64, factors: &[(&str, usize)]) -> CorrelatorTerm {
    CorrelatorTerm::new(int(c), factors)
}

fn stated(name: &str, sig: Signature, terms: Vec<CorrelatorTerm>, bound: i64) -> LinearInequality {
    LinearInequality::new(name, sig, terms, int(bound)).expect("well-formed terms")
}

/// `<A0B0> + <A0B1> + <A1B0C1> - <A1B1C1> + 2<A0C0> <= 4`.
pub fn mao_inequality() -> LinearInequality {
    stated(
        "mao",
        Signature::tripartite_222(),
        vec![
            term(1, &[("A", 0), ("B", 0)]),
            term(1, &[("A", 0), ("B", 1)]),
            term(1, &[("A", 1), ("B", 0), ("C", 1)]),
            term(-1, &[("A", 1), ("B", 1), ("C", 1)]),
            term(2, &[("A", 0), ("C", 0)]),
        ],
        4,
    )
}

/// Correlator form of the Chao-Reichardt inequality:
/// `<A0B0> + <A0B1> + <A1B0C1> - <A1B1C1> + 4<A0C0> <= 6`.
pub fn chao_reichardt_correlator() -> LinearInequality {
    stated(
        "cr-corr",
        Signature::tripartite_222(),
        vec![
            term(1, &[("A", 0), ("B", 0)]),
            term(1, &[("A", 0), ("B", 1)]),
            term(1, &[("A", 1), ("B", 0), ("C", 1)]),
            term(-1, &[("A", 1), ("B", 1), ("C", 1)]),
            term(4, &[("A", 0), ("C", 0)]),
        ],
        6,
    )
}

/// `<A0B0> - <A0B1> + <A1B0C1> + <A1B1C1> + 2<A0C0> <= 4`.
pub fn mao_relabeled() -> LinearInequality {
    stated(
        "mao-relabeled",
        Signature::tripartite_222(),
        vec![
            term(1, &[("A", 0), ("B", 0)]),
            term(-1, &[("A", 0), ("B", 1)]),
            term(1, &[("A", 1), ("B", 0), ("C", 1)]),
            term(1, &[("A", 1), ("B", 1), ("C", 1)]),
            term(2, &[("A", 0), ("C", 0)]),
        ],
        4,
    )
}

/// [`mao_relabeled`] with A and C exchanged:
/// `<C0B0> - <C0B1> + <A1B0C1> + <A1B1C1> + 2<A0C0> <= 4`.
pub fn mao_relabeled_swapped() -> LinearInequality {
    stated(
        "mao-relabeled-swapped",
        Signature::tripartite_222(),
        vec![
            term(1, &[("C", 0), ("B", 0)]),
            term(-1, &[("C", 0), ("B", 1)]),
            term(1, &[("A", 1), ("B", 0), ("C", 1)]),
            term(1, &[("A", 1), ("B", 1), ("C", 1)]),
            term(2, &[("A", 0), ("C", 0)]),
        ],
        4,
    )
}

/// `<A0B0> + <B0C0> - <A0B1> - <B1C0> + 4<A0C0> + 2<A1B0C1> + 2<A1B1C1> <= 8`.
pub fn cao_inequality() -> LinearInequality {
    stated(
        "cao",
        Signature::tripartite_222(),
        vec![
            term(1, &[("A", 0), ("B", 0)]),
            term(1, &[("B", 0), ("C", 0)]),
            term(-1, &[("A", 0), ("B", 1)]),
            term(-1, &[("B", 1), ("C", 0)]),
            term(4, &[("A", 0), ("C", 0)]),
            term(2, &[("A", 1), ("B", 0), ("C", 1)]),
            term(2, &[("A", 1), ("B", 1), ("C", 1)]),
        ],
        8,
    )
}

/// `<A0C0> <= 1`.
pub fn trivial_a0c0() -> LinearInequality {
    stated(
        "a0c0-trivial",
        Signature::tripartite_222(),
        vec![term(1, &[("A", 0), ("C", 0)])],
        1,
    )
}

/// Linear twin of the conditional three-setting inequality:
/// `<A0B0> + <A0B1> + <A1B0C1> - <A1B1C1> + <A0B2> + <B2C0> <= 6`.
pub fn cao_s14_linearized() -> LinearInequality {
    stated(
        "cao-s14-linear",
        Signature::tripartite_232(),
        vec![
            term(1, &[("A", 0), ("B", 0)]),
            term(1, &[("A", 0), ("B", 1)]),
            term(1, &[("A", 1), ("B", 0), ("C", 1)]),
            term(-1, &[("A", 1), ("B", 1), ("C", 1)]),
            term(1, &[("A", 0), ("B", 2)]),
            term(1, &[("B", 2), ("C", 0)]),
        ],
        6,
    )
}

/// Negates every term in which `party` appears with `setting`: the effect
/// of exchanging that party's two outcomes at that setting.
pub fn relabel_output(ineq: &LinearInequality, party: &str, setting: usize) -> LinearInequality {
    let mut out = ineq.clone();
    for t in &mut out.terms {
        if t.factors.iter().any(|(p, s)| p == party && *s == setting) {
            t.coefficient = -t.coefficient.clone();
        }
    }
    out
}

/// Exchanges the roles of two parties in every term and in the signature.
pub fn swap_parties(
    ineq: &LinearInequality,
    p: &str,
    q: &str,
) -> Result<LinearInequality, InequalityError> {
    let i = ineq
        .signature
        .index(p)
        .ok_or_else(|| InequalityError::Term(format!("unknown party `{p}`")))?;
    let j = ineq
        .signature
        .index(q)
        .ok_or_else(|| InequalityError::Term(format!("unknown party `{q}`")))?;
    let mut out = ineq.clone();
    out.signature.settings.swap(i, j);
    for t in &mut out.terms {
        for (name, _) in &mut t.factors {
            if name == p {
                *name = q.to_string();
            } else if name == q {
                *name = p.to_string();
            }
        }
    }
    Ok(out)
}

/// Sum of two inequalities over one signature. Terms with equal support are
/// merged and zero terms dropped.
pub fn add(
    a: &LinearInequality,
    b: &LinearInequality,
) -> Result<LinearInequality, InequalityError> {
    if a.signature != b.signature {
        return Err(InequalityError::Signature(
            "inequalities have different signatures".into(),
        ));
    }
    let sig = &a.signature;
    let mut terms: Vec<CorrelatorTerm> = Vec::new();
    for t in a.terms.iter().chain(&b.terms) {
        match terms.iter_mut().find(|u| u.support(sig) == t.support(sig)) {
            Some(u) => u.coefficient += &t.coefficient,
            None => terms.push(t.clone()),
        }
    }
    terms.retain(|t| !t.coefficient.is_zero());
    Ok(LinearInequality {
        name: format!("{}+{}", a.name, b.name),
        signature: sig.clone(),
        terms,
        bound: &a.bound + &b.bound,
    })
}

/// Behavior with `party`'s two outcomes exchanged when its setting is
/// `setting`.
pub fn relabel_behavior<T: Scalar>(
    b: &ConditionalTable<T>,
    party: &str,
    setting: usize,
) -> Result<ConditionalTable<T>, InequalityError> {
    let j = b
        .party_index(party)
        .ok_or_else(|| InequalityError::Signature(format!("no party `{party}`")))?;
    if b.output_alphabets()[j].len() != 2 {
        return Err(InequalityError::Signature(format!(
            "party `{party}` does not have two outcomes"
        )));
    }
    let mut src = Vec::new();
    Ok(ConditionalTable::from_fn(
        b.parties().to_vec(),
        b.input_alphabets().to_vec(),
        b.output_alphabets().to_vec(),
        |x, a| {
            src.clear();
            src.extend_from_slice(a);
            if x[j] == setting {
                src[j] = 1 - src[j];
            }
            b.get(x, &src).clone()
        },
    )?)
}

/// Behavior in which parties `p` and `q` exchange roles while keeping their
/// names: the new `p` behaves as the old `q` and vice versa.
pub fn swap_behavior_parties<T: Scalar>(
    b: &ConditionalTable<T>,
    p: &str,
    q: &str,
) -> Result<ConditionalTable<T>, InequalityError> {
    let i = b
        .party_index(p)
        .ok_or_else(|| InequalityError::Signature(format!("no party `{p}`")))?;
    let j = b
        .party_index(q)
        .ok_or_else(|| InequalityError::Signature(format!("no party `{q}`")))?;
    let mut order: Vec<usize> = (0..b.party_count()).collect();
    order.swap(i, j);
    Ok(b.permute_parties(&order)?
        .with_parties(b.parties().to_vec())?)
}

/// Party positions of A, B, C in `b`.
fn abc<T: Scalar>(b: &ConditionalTable<T>) -> [usize; 3] {
    ["A", "B", "C"].map(|p| b.party_index(p).expect("signature checked"))
}

/// Probability of an event on the joint outcome positions at one setting
/// triple of (A, B, C).
fn event<T: Scalar>(
    b: &ConditionalTable<T>,
    settings: [usize; 3],
    holds: impl Fn([usize; 3]) -> bool,
) -> T {
    let pos = abc(b);
    let mut x = vec![0; 3];
    for k in 0..3 {
        x[pos[k]] = settings[k];
    }
    let col = b.column(b.input_radix().encode(&x));
    let radix: &Radix = b.output_radix();
    let mut total = T::zero();
    for (a, v) in col.iter().enumerate() {
        let d = radix.decode(a);
        if holds([d[pos[0]], d[pos[1]], d[pos[2]]]) {
            total = total + v.clone();
        }
    }
    total
}

/// Chao-Reichardt probability form, `>= 1` direction:
/// `4P(A!=C|X=0,Z=0) + P(A!=B|00) + P(A!=B|01) + P(ABC=-1|101) + P(ABC=+1|111)`.
/// B's setting is 0 in the first term.
pub fn chao_reichardt_probability_form<T: Scalar>(
    b: &ConditionalTable<T>,
    tol: f64,
) -> Result<Evaluation<T>, InequalityError> {
    Signature::tripartite_222().check(b)?;
    check_nonsignaling(b, tol)?;
    let parity = |a: [usize; 3]| a[0] ^ a[1] ^ a[2];
    let four = T::from_rational(&int(4));
    let value = four * event(b, [0, 0, 0], |a| a[0] != a[2])
        + event(b, [0, 0, 0], |a| a[0] != a[1])
        + event(b, [0, 1, 0], |a| a[0] != a[1])
        + event(b, [1, 0, 1], |a| parity(a) == 1)
        + event(b, [1, 1, 1], |a| parity(a) == 0);
    let satisfied = geq(&value, &Rational::one(), tol);
    Ok(Evaluation { value, satisfied })
}

/// Parts of the conditional three-setting inequality on a (2,3,2) behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct S14Parts<T> {
    /// `<C1>`.
    pub c1: T,
    /// `(1 - <C1>)/2 * (block at C = -1)`, zero when `P(C=-1|Z=1) = 0`.
    pub minus_block: T,
    /// `(1 + <C1>)/2 * (block at C = +1)`, zero when `P(C=+1|Z=1) = 0`.
    pub plus_block: T,
    /// `<A0B2> + <B2C0>`.
    pub tail: T,
}

impl<T: Scalar> S14Parts<T> {
    /// The two conditional blocks together.
    pub fn conditional(&self) -> T {
        self.minus_block.clone() + self.plus_block.clone()
    }

    pub fn value(&self) -> T {
        self.conditional() + self.tail.clone()
    }
}

/// Signs of `<A0B0>, <A0B1>, <A1B0>, <A1B1>` conditioned on `C = -1` and on
/// `C = +1`.
const S14_MINUS: [i64; 4] = [1, 1, -1, 1];
const S14_PLUS: [i64; 4] = [1, 1, 1, -1];

/// Evaluates the three-setting inequality term by term: conditional AB
/// correlators given `C = c, Z = 1`, weighted by `(1 +- <C1>)/2`, plus the
/// `<A0B2> + <B2C0>` tail. Satisfied when the value is at most 6.
pub fn cao_s14_parts<T: Scalar>(
    b: &ConditionalTable<T>,
    tol: f64,
) -> Result<S14Parts<T>, InequalityError> {
    Signature::tripartite_232().check(b)?;
    check_nonsignaling(b, tol)?;
    let c1 = correlator_unchecked(b, &positions(b, &[("C".to_string(), 1)])?)?;
    let two = T::from_rational(&int(2));
    let one = T::one();
    let weight_minus = (one.clone() - c1.clone()) / two.clone();
    let weight_plus = (one + c1.clone()) / two;
    let block = |c: usize, signs: &[i64; 4], weight: &T| -> T {
        let mut total = T::zero();
        for (k, (x, y)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            // Same-column normalization; by nonsignaling it equals P(C=c|Z=1).
            let pc = event(b, [x, y, 1], |a| a[2] == c);
            let vanishes = if T::EXACT {
                pc.is_zero()
            } else {
                pc.to_f64().abs() <= tol
            };
            if vanishes {
                continue;
            }
            let joint = event(b, [x, y, 1], |a| a[2] == c && a[0] == a[1])
                - event(b, [x, y, 1], |a| a[2] == c && a[0] != a[1]);
            let conditional = joint / pc;
            total = total + T::from_rational(&int(signs[k])) * conditional;
        }
        weight.clone() * total
    };
    let minus_block = block(1, &S14_MINUS, &weight_minus);
    let plus_block = block(0, &S14_PLUS, &weight_plus);
    let tail = correlator_unchecked(b, &positions(b, &[("A".into(), 0), ("B".into(), 2)])?)?
        + correlator_unchecked(b, &positions(b, &[("B".into(), 2), ("C".into(), 0)])?)?;
    Ok(S14Parts {
        c1,
        minus_block,
        plus_block,
        tail,
    })
}

pub fn evaluate_cao_s14<T: Scalar>(
    b: &ConditionalTable<T>,
    tol: f64,
) -> Result<Evaluation<T>, InequalityError> {
    let parts = cao_s14_parts(b, tol)?;
    let value = parts.value();
    let satisfied = leq(&value, &int(6), tol);
    Ok(Evaluation { value, satisfied })
}

/// Exact value `4 - L/2` of the probability form, with `L` the correlator
/// form's left-hand side.
pub fn cr_probability_from_correlator(l: &Rational) -> Rational {
    int(4) - l * ratio(1, 2)
}

#[cfg(test)]
mod tests;

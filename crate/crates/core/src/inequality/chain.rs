//! Step-by-step check that the tripartite inequalities follow from the Mao
//! inequality. Linear functionals are compared on every deterministic
//! behavior of their signature, which spans the affine hull of all
//! nonsignaling behaviors.

use num_traits::Zero;
use serde::Serialize;

use super::{
    add, cao_inequality, cao_s14_linearized, cao_s14_parts, chao_reichardt_correlator,
    chao_reichardt_probability_form, cr_probability_from_correlator, evaluate, mao_inequality,
    mao_relabeled, mao_relabeled_swapped, relabel_output, swap_parties, trivial_a0c0,
    CorrelatorTerm, LinearInequality, Signature,
};
use crate::decompose::{local_deterministic_vertices, DEFAULT_VERTEX_CAP};
use crate::rational::{format_rational, int, Rational};
use crate::resource::NonsignalingResource;

/// All deterministic two-outcome behaviors of a signature.
pub fn deterministic_behaviors(sig: &Signature) -> Vec<NonsignalingResource> {
    let parties: Vec<&str> = sig.parties.iter().map(String::as_str).collect();
    let (ins, outs) = sig.alphabets();
    local_deterministic_vertices(&parties, &ins, &outs, DEFAULT_VERTEX_CAP)
        .expect("small signature")
        .vertices()
        .to_vec()
}

/// Outcome signs per setting, e.g. `A=(+,-) B=(+,+) C=(-,-)`.
fn describe(b: &NonsignalingResource) -> String {
    match b.as_local_deterministic() {
        Some(f) => b
            .parties()
            .iter()
            .zip(&f)
            .map(|(p, outs)| {
                let s: Vec<&str> = outs
                    .iter()
                    .map(|&o| if o == 0 { "+" } else { "-" })
                    .collect();
                format!("{p}=({})", s.join(","))
            })
            .collect::<Vec<_>>()
            .join(" "),
        None => b.id().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub behavior: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResult {
    pub step: &'static str,
    pub claim: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationReport {
    pub steps: Vec<StepResult>,
}

impl DerivationReport {
    pub fn all_passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }
}

/// The inequalities as written down, against which derived forms are checked.
#[derive(Debug, Clone, PartialEq)]
pub struct StatedForms {
    pub mao: LinearInequality,
    pub relabeled: LinearInequality,
    pub relabeled_swapped: LinearInequality,
    pub cao: LinearInequality,
    pub cr_correlator: LinearInequality,
    pub s14_linear: LinearInequality,
}

impl Default for StatedForms {
    fn default() -> Self {
        Self {
            mao: mao_inequality(),
            relabeled: mao_relabeled(),
            relabeled_swapped: mao_relabeled_swapped(),
            cao: cao_inequality(),
            cr_correlator: chao_reichardt_correlator(),
            s14_linear: cao_s14_linearized(),
        }
    }
}

fn lhs(ineq: &LinearInequality, b: &NonsignalingResource) -> Rational {
    evaluate(ineq, b.table(), 0.0)
        .expect("signature matches")
        .value
}

/// First behavior on which the two functions differ.
fn first_difference(
    behaviors: &[NonsignalingResource],
    left: impl Fn(&NonsignalingResource) -> Rational,
    right: impl Fn(&NonsignalingResource) -> Rational,
) -> Option<Witness> {
    behaviors.iter().find_map(|b| {
        let (l, r) = (left(b), right(b));
        (l != r).then(|| Witness {
            behavior: describe(b),
            left: format_rational(&l),
            right: format_rational(&r),
        })
    })
}

fn same_inequality(
    step: &'static str,
    claim: &str,
    stated: &LinearInequality,
    derived: &LinearInequality,
    behaviors: &[NonsignalingResource],
) -> StepResult {
    let witness = first_difference(behaviors, |b| lhs(stated, b), |b| lhs(derived, b));
    let bounds_equal = stated.bound() == derived.bound();
    let passed = witness.is_none() && bounds_equal;
    let detail = if !bounds_equal {
        format!(
            "bounds differ: {} vs {}",
            format_rational(stated.bound()),
            format_rational(derived.bound())
        )
    } else if witness.is_some() {
        "left-hand sides differ".into()
    } else {
        format!(
            "equal on all {} deterministic behaviors, bound {}",
            behaviors.len(),
            format_rational(stated.bound())
        )
    };
    StepResult {
        step,
        claim: claim.into(),
        passed,
        detail,
        witness,
    }
}

pub fn verify_derivation_chain() -> DerivationReport {
    verify_derivation_chain_with(&StatedForms::default())
}

/// Runs every step against the given stated forms.
pub fn verify_derivation_chain_with(forms: &StatedForms) -> DerivationReport {
    let d222 = deterministic_behaviors(&Signature::tripartite_222());
    let d232 = deterministic_behaviors(&Signature::tripartite_232());
    let mut steps = Vec::new();

    steps.push(same_inequality(
        "a",
        "exchanging B's outcomes at setting 1 turns mao into the relabeled form",
        &forms.relabeled,
        &relabel_output(&forms.mao, "B", 1),
        &d222,
    ));

    let swapped = swap_parties(&forms.relabeled, "A", "C").expect("parties exist");
    let mut b = same_inequality(
        "b",
        "relabeled form plus its A<->C swap gives cao",
        &forms.cao,
        &add(&forms.relabeled, &swapped).expect("same signature"),
        &d222,
    );
    let swap_step = same_inequality("b", "", &forms.relabeled_swapped, &swapped, &d222);
    if !swap_step.passed {
        b.passed = false;
        b.detail = format!("A<->C swap of the relabeled form: {}", swap_step.detail);
        b.witness = swap_step.witness;
    }
    steps.push(b);

    let two_trivial = trivial_a0c0().scaled(&int(2));
    steps.push(same_inequality(
        "c",
        "mao plus twice <A0C0> <= 1 gives the Chao-Reichardt correlator form",
        &forms.cr_correlator,
        &add(&forms.mao, &two_trivial).expect("same signature"),
        &d222,
    ));

    let witness = first_difference(
        &d222,
        |b| {
            chao_reichardt_probability_form(b.table(), 0.0)
                .expect("signature matches")
                .value
        },
        |b| cr_probability_from_correlator(&lhs(&forms.cr_correlator, b)),
    );
    steps.push(StepResult {
        step: "d",
        claim: "probability form = 4 - (correlator form)/2, so >= 1 iff <= 6".into(),
        passed: witness.is_none(),
        detail: if witness.is_none() {
            format!(
                "affine identity holds on all {} deterministic behaviors",
                d222.len()
            )
        } else {
            "affine identity fails".into()
        },
        witness,
    });

    let first_four = LinearInequality::new(
        "mao-first-four",
        Signature::tripartite_232(),
        forms.mao.terms()[..4.min(forms.mao.terms().len())].to_vec(),
        Rational::zero(),
    )
    .expect("terms fit the wider signature");
    let mut witness = first_difference(
        &d232,
        |b| {
            cao_s14_parts(b.table(), 0.0)
                .expect("signature matches")
                .conditional()
        },
        |b| lhs(&first_four, b),
    );
    if witness.is_none() {
        witness = first_difference(
            &d232,
            |b| {
                cao_s14_parts(b.table(), 0.0)
                    .expect("signature matches")
                    .value()
            },
            |b| lhs(&forms.s14_linear, b),
        );
    }
    let bound_ok = *forms.s14_linear.bound() == int(6);
    steps.push(StepResult {
        step: "e",
        claim:
            "the conditional blocks of the three-setting inequality equal the first four mao terms"
                .into(),
        passed: witness.is_none() && bound_ok,
        detail: match (&witness, bound_ok) {
            (None, true) => format!("equal on all {} deterministic behaviors", d232.len()),
            (None, false) => "linear twin has the wrong bound".into(),
            _ => "functionals differ".into(),
        },
        witness,
    });

    let slack = LinearInequality::new(
        "a0c0-slack",
        Signature::tripartite_232(),
        vec![
            CorrelatorTerm::new(int(1), &[("A", 0), ("C", 0)]),
            CorrelatorTerm::new(int(-1), &[("A", 0), ("B", 2)]),
            CorrelatorTerm::new(int(-1), &[("B", 2), ("C", 0)]),
        ],
        Rational::zero(),
    )
    .expect("well-formed terms");
    let (min, at) = d232
        .iter()
        .map(|b| (lhs(&slack, b) + int(1), b))
        .min_by(|x, y| x.0.cmp(&y.0))
        .expect("non-empty");
    let passed = min >= Rational::zero();
    steps.push(StepResult {
        step: "f",
        claim: "<A0C0> - <A0B2> - <B2C0> + 1 >= 0 on every deterministic behavior".into(),
        passed,
        detail: format!(
            "minimum {} over {} deterministic behaviors",
            format_rational(&min),
            d232.len()
        ),
        witness: Some(Witness {
            behavior: describe(at),
            left: format_rational(&min),
            right: format_rational(&Rational::zero()),
        }),
    });

    DerivationReport { steps }
}

use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::fixtures::pass_through_network;
use crate::rational::ratio;
use crate::resource::{make_modular_box, make_pr_box, make_uniform, NonsignalingResource};

fn all_plus(sig: &Signature) -> NonsignalingResource {
    deterministic_behaviors(sig).into_iter().next().unwrap()
}

fn uniform(sig: &Signature) -> NonsignalingResource {
    let (ins, outs) = sig.alphabets();
    let parties: Vec<&str> = sig.parties.iter().map(String::as_str).collect();
    make_uniform("U", &parties, &ins, &outs).unwrap()
}

fn exact(ineq: &LinearInequality, b: &NonsignalingResource) -> Evaluation<Rational> {
    evaluate(ineq, b.table(), 0.0).unwrap()
}

fn d222() -> Vec<NonsignalingResource> {
    deterministic_behaviors(&Signature::tripartite_222())
}

fn d232() -> Vec<NonsignalingResource> {
    deterministic_behaviors(&Signature::tripartite_232())
}

#[test]
fn vertex_counts() {
    assert_eq!(d222().len(), 64);
    assert_eq!(d232().len(), 128);
}

#[test]
fn correlators_of_simple_behaviors() {
    let sig = Signature::tripartite_222();
    let plus = all_plus(&sig);
    let u = uniform(&sig);
    for f in [
        vec![("A", 0)],
        vec![("A", 1), ("B", 0)],
        vec![("B", 1), ("C", 0)],
        vec![("A", 1), ("B", 1), ("C", 0)],
    ] {
        assert_eq!(correlator(plus.table(), &f, 0.0).unwrap(), Rational::one());
        assert_eq!(correlator(u.table(), &f, 0.0).unwrap(), Rational::zero());
    }
}

#[test]
fn pr_box_correlators() {
    let b = pass_through_network(&make_pr_box())
        .induced_behavior()
        .unwrap();
    let c = |x, y| correlator(b.table(), &[("A", x), ("B", y)], 0.0).unwrap();
    assert_eq!(c(0, 0), Rational::one());
    assert_eq!(c(0, 1), Rational::one());
    assert_eq!(c(1, 0), Rational::one());
    assert_eq!(c(1, 1), -Rational::one());
}

#[test]
fn signaling_and_nonbinary_behaviors_are_refused() {
    let bin = Alphabet::range(2);
    let t = ConditionalTable::from_fn(
        vec!["A".into(), "B".into()],
        vec![bin.clone(), bin.clone()],
        vec![bin.clone(), bin.clone()],
        |x, a| {
            if a[0] == x[1] {
                ratio(1, 2)
            } else {
                Rational::zero()
            }
        },
    )
    .unwrap();
    assert!(matches!(
        correlator(&t, &[("A", 0)], 0.0),
        Err(InequalityError::Signaling(_))
    ));
    let three = make_uniform(
        "U",
        &["A", "B"],
        &[bin.clone(), bin.clone()],
        &[Alphabet::range(3), bin],
    )
    .unwrap();
    assert!(matches!(
        correlator(three.table(), &[("A", 0), ("B", 0)], 0.0),
        Err(InequalityError::Signature(_))
    ));
}

#[test]
fn stated_coefficients() {
    let mao = mao_inequality();
    assert_eq!(mao.coefficients(), [1, 1, 1, -1, 2].map(int).to_vec());
    assert_eq!(*mao.bound(), int(4));
    assert_eq!(*chao_reichardt_correlator().bound(), int(6));
    assert_eq!(
        chao_reichardt_correlator().coefficients(),
        [1, 1, 1, -1, 4].map(int).to_vec()
    );
    let cao = cao_inequality();
    assert_eq!(
        cao.coefficients(),
        [1, 1, -1, -1, 4, 2, 2].map(int).to_vec()
    );
    assert_eq!(*cao.bound(), int(8));
}

#[test]
fn mao_on_simple_behaviors() {
    let sig = Signature::tripartite_222();
    let e = exact(&mao_inequality(), &all_plus(&sig));
    assert_eq!(e.value, int(4));
    assert!(e.satisfied);
    assert_eq!(exact(&mao_inequality(), &uniform(&sig)).value, int(0));
}

#[test]
fn signature_mismatch_is_an_error() {
    let b = all_plus(&Signature::tripartite_232());
    assert!(matches!(
        evaluate(&mao_inequality(), b.table(), 0.0),
        Err(InequalityError::Signature(_))
    ));
    assert!(matches!(
        evaluate_cao_s14(all_plus(&Signature::tripartite_222()).table(), 0.0),
        Err(InequalityError::Signature(_))
    ));
}

#[test]
fn deterministic_behaviors_satisfy_every_inequality() {
    for b in d222() {
        for ineq in [
            mao_inequality(),
            chao_reichardt_correlator(),
            cao_inequality(),
            mao_relabeled(),
        ] {
            assert!(exact(&ineq, &b).satisfied, "{} fails", ineq.name);
        }
        assert!(
            chao_reichardt_probability_form(b.table(), 0.0)
                .unwrap()
                .satisfied
        );
    }
    for b in d232() {
        assert!(evaluate_cao_s14(b.table(), 0.0).unwrap().satisfied);
    }
}

#[test]
fn cr_probability_form_values() {
    let sig = Signature::tripartite_222();
    let e = chao_reichardt_probability_form(all_plus(&sig).table(), 0.0).unwrap();
    assert_eq!(e.value, int(1));
    assert!(e.satisfied);
    // 4/2 + 1/2 + 1/2 + 1/2 + 1/2: every listed event has probability 1/2.
    assert_eq!(
        chao_reichardt_probability_form(uniform(&sig).table(), 0.0)
            .unwrap()
            .value,
        int(4)
    );
    for b in d222() {
        let p = chao_reichardt_probability_form(b.table(), 0.0)
            .unwrap()
            .value;
        let l = exact(&chao_reichardt_correlator(), &b).value;
        assert_eq!(p, int(4) - l / int(2));
    }
}

#[test]
fn s14_on_all_plus() {
    let parts = cao_s14_parts(all_plus(&Signature::tripartite_232()).table(), 0.0).unwrap();
    assert_eq!(parts.c1, int(1));
    assert_eq!(parts.minus_block, int(0));
    assert_eq!(parts.plus_block, int(2));
    assert_eq!(parts.value(), int(4));
}

#[test]
fn s14_with_independent_c() {
    // A and B deterministic functions of their settings, C a uniform coin
    // independent of them.
    let sig = Signature::tripartite_232();
    let (ins, outs) = sig.alphabets();
    let t = ConditionalTable::from_fn(sig.parties.clone(), ins, outs, |x, a| {
        if a[0] == x[0] && a[1] == (x[1] == 1) as usize {
            ratio(1, 2)
        } else {
            Rational::zero()
        }
    })
    .unwrap();
    let b = NonsignalingResource::from_table("ind", t).unwrap();
    let parts = cao_s14_parts(b.table(), 0.0).unwrap();
    assert_eq!(parts.c1, int(0));
    let e = |x, y| correlator(b.table(), &[("A", x), ("B", y)], 0.0).unwrap();
    let unconditional: Rational = e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1);
    let unconditional_minus: Rational = e(0, 0) + e(0, 1) - e(1, 0) + e(1, 1);
    assert_eq!(parts.plus_block, unconditional * ratio(1, 2));
    assert_eq!(parts.minus_block, unconditional_minus * ratio(1, 2));
}

#[test]
fn s14_matches_linear_twin_on_deterministic_behaviors() {
    let lin = cao_s14_linearized();
    for b in d232() {
        assert_eq!(
            evaluate_cao_s14(b.table(), 0.0).unwrap().value,
            exact(&lin, &b).value
        );
    }
}

#[test]
fn relabel_gives_stated_form() {
    let r = relabel_output(&mao_inequality(), "B", 1);
    assert_eq!(r.coefficients(), [1, -1, 1, 1, 2].map(int).to_vec());
    assert_eq!(*r.bound(), int(4));
    assert_eq!(relabel_output(&r, "B", 1), mao_inequality());
}

#[test]
fn transform_commutation_on_deterministic_behaviors() {
    let mao = mao_inequality();
    let cao = cao_inequality();
    for b in d222() {
        for (p, s) in [("A", 0), ("B", 1), ("C", 1)] {
            let moved = relabel_behavior(b.table(), p, s).unwrap();
            assert_eq!(
                exact(&relabel_output(&mao, p, s), &b).value,
                evaluate(&mao, &moved, 0.0).unwrap().value
            );
        }
        let swapped = swap_behavior_parties(b.table(), "A", "C").unwrap();
        assert_eq!(
            exact(&swap_parties(&cao, "A", "C").unwrap(), &b).value,
            evaluate(&cao, &swapped, 0.0).unwrap().value
        );
    }
}

#[test]
fn swap_and_add_give_cao() {
    let r = mao_relabeled();
    let s = swap_parties(&r, "A", "C").unwrap();
    assert_eq!(
        s.terms()[0].factors,
        vec![("C".to_string(), 0), ("B".to_string(), 0)]
    );
    let sum = add(&r, &s).unwrap();
    assert_eq!(*sum.bound(), int(8));
    let cao = cao_inequality();
    for b in d222() {
        assert_eq!(
            exact(&s, &b).value,
            exact(&mao_relabeled_swapped(), &b).value
        );
        assert_eq!(exact(&sum, &b).value, exact(&cao, &b).value);
    }
    let z = LinearInequality::zero(Signature::tripartite_222());
    let same = add(&r, &z).unwrap();
    assert_eq!(same.terms(), r.terms());
    assert_eq!(same.bound(), r.bound());
    assert!(add(&r, &LinearInequality::zero(Signature::tripartite_232())).is_err());
}

#[test]
fn derivation_chain_passes() {
    let report = verify_derivation_chain();
    assert_eq!(report.steps.len(), 6);
    assert!(report.all_passed(), "{report:#?}");
    let f = &report.steps[5];
    assert_eq!(f.witness.as_ref().unwrap().left, "0/1");
}

#[test]
fn mutated_form_is_caught() {
    let mut forms = StatedForms::default();
    let mut terms = forms.relabeled.terms().to_vec();
    terms[1].coefficient = int(1);
    forms.relabeled =
        LinearInequality::new("bad", Signature::tripartite_222(), terms, int(4)).unwrap();
    let report = verify_derivation_chain_with(&forms);
    let a = &report.steps[0];
    assert!(!a.passed);
    let w = a.witness.as_ref().unwrap();
    assert_ne!(w.left, w.right);
}

#[test]
fn bad_terms_are_rejected() {
    let sig = Signature::tripartite_222();
    assert!(LinearInequality::new(
        "x",
        sig.clone(),
        vec![CorrelatorTerm::new(int(1), &[("D", 0)])],
        int(1)
    )
    .is_err());
    assert!(LinearInequality::new(
        "x",
        sig.clone(),
        vec![CorrelatorTerm::new(int(1), &[("A", 2)])],
        int(1)
    )
    .is_err());
    assert!(LinearInequality::new(
        "x",
        sig.clone(),
        vec![CorrelatorTerm::new(int(1), &[("A", 0), ("A", 1)])],
        int(1)
    )
    .is_err());
    assert!(
        LinearInequality::new("x", sig, vec![CorrelatorTerm::new(int(1), &[])], int(1)).is_err()
    );
}

#[test]
fn float_behaviors_use_the_tolerance() {
    let b = all_plus(&Signature::tripartite_222());
    let f = b.table().map(|v| v.to_f64() * (1.0 - 1e-12));
    let e = evaluate(&mao_inequality(), &f, DEFAULT_TOLERANCE).unwrap();
    assert!((e.value - 4.0).abs() < 1e-9);
    assert!(e.satisfied);
}

/// Random mixture of deterministic behaviors and tripartite PR-type boxes.
fn random_behavior(
    sig: &Signature,
    weights: &[u8],
    box_weight: u8,
    f_choice: u8,
) -> NonsignalingResource {
    let dets = deterministic_behaviors(sig);
    let (ins, outs) = sig.alphabets();
    let nl = make_modular_box("G", &["A", "B", "C"], &ins, &outs, |x| match f_choice % 3 {
        0 => x[0] * x[1] * x[2],
        1 => x[0] * x[2] + x[1],
        _ => x[0] ^ (x[1] & 1),
    })
    .unwrap();
    let mut parts: Vec<(Rational, &NonsignalingResource)> = Vec::new();
    let total: i64 = weights.iter().map(|&w| w as i64).sum::<i64>() + box_weight as i64;
    for (i, &w) in weights.iter().enumerate() {
        parts.push((ratio(w as i64, total), &dets[(i * 37) % dets.len()]));
    }
    parts.push((ratio(box_weight as i64, total), &nl));
    NonsignalingResource::mixture("mix", &parts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn probability_and_correlator_forms_agree(w in proptest::collection::vec(0u8..4, 8), g in 1u8..4, f in 0u8..3) {
        let b = random_behavior(&Signature::tripartite_222(), &w, g, f);
        let p = chao_reichardt_probability_form(b.table(), 0.0).unwrap();
        let l = exact(&chao_reichardt_correlator(), &b);
        prop_assert_eq!(&p.value, &cr_probability_from_correlator(&l.value));
        prop_assert_eq!(p.satisfied, l.satisfied);
    }

    #[test]
    fn s14_equals_linear_twin(w in proptest::collection::vec(0u8..4, 8), g in 0u8..4, f in 0u8..3) {
        prop_assume!(g > 0 || w.iter().any(|&v| v > 0));
        let b = random_behavior(&Signature::tripartite_232(), &w, g, f);
        prop_assert_eq!(evaluate_cao_s14(b.table(), 0.0).unwrap().value, exact(&cao_s14_linearized(), &b).value);
    }

    #[test]
    fn relabel_commutes_on_mixtures(w in proptest::collection::vec(0u8..4, 6), g in 1u8..4, f in 0u8..3, p in 0usize..3, s in 0usize..2) {
        let b = random_behavior(&Signature::tripartite_222(), &w, g, f);
        let party = ["A", "B", "C"][p];
        let moved = relabel_behavior(b.table(), party, s).unwrap();
        for ineq in [mao_inequality(), cao_inequality()] {
            prop_assert_eq!(
                exact(&relabel_output(&ineq, party, s), &b).value,
                evaluate(&ineq, &moved, 0.0).unwrap().value
            );
        }
    }
}

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_traits::One;
use proptest::prelude::*;

use super::*;
use crate::inequality::{
    cao_inequality, cao_s14_linearized, correlator, mao_inequality, CorrelatorTerm, Signature,
};
use crate::rational::Rational;

fn uniform(a: f64, b: f64, c: f64) -> QuantumStrategy {
    QuantumStrategy::new(vec![a, a], vec![b, b], vec![c, c]).unwrap()
}

fn p(t: &ConditionalTable<f64>, x: [usize; 3], a: [usize; 3]) -> f64 {
    *t.get(&x, &a)
}

/// Largest gap between a one-party marginal computed at different settings
/// of the other two.
fn max_signaling(t: &ConditionalTable<f64>) -> f64 {
    let ins: Vec<usize> = t.input_alphabets().iter().map(|a| a.len()).collect();
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != j).collect();
        for xj in 0..ins[j] {
            for aj in 0..2 {
                let mut seen: Option<f64> = None;
                for y in 0..ins[others[0]] {
                    for z in 0..ins[others[1]] {
                        let mut x = [0; 3];
                        x[j] = xj;
                        x[others[0]] = y;
                        x[others[1]] = z;
                        let mut m = 0.0;
                        for b in 0..2 {
                            for c in 0..2 {
                                let mut a = [0; 3];
                                a[j] = aj;
                                a[others[0]] = b;
                                a[others[1]] = c;
                                m += p(t, x, a);
                            }
                        }
                        if let Some(s) = seen {
                            worst = worst.max((s - m).abs());
                        }
                        seen.get_or_insert(m);
                    }
                }
            }
        }
    }
    worst
}

#[test]
fn z_measurements_give_perfect_correlation() {
    let t = ghz_behavior(&uniform(0.0, 0.0, 0.0)).unwrap();
    assert!((p(&t, [0; 3], [0, 0, 0]) - 0.5).abs() < 1e-12);
    assert!((p(&t, [0; 3], [1, 1, 1]) - 0.5).abs() < 1e-12);
    for a in 1..7 {
        let a = [a >> 2 & 1, a >> 1 & 1, a & 1];
        assert!(p(&t, [0; 3], a).abs() < 1e-12);
    }
}

#[test]
fn x_measurements_have_unit_triple_correlator() {
    let t = ghz_behavior(&uniform(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2)).unwrap();
    let v = correlator(&t, &[("A", 0), ("B", 0), ("C", 0)], 1e-10).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
    // Two-party X correlators vanish.
    let v = correlator(&t, &[("A", 0), ("B", 0)], 1e-10).unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn eigenvectors_are_orthonormal() {
    for k in 0..32 {
        let m = MeasurementSetting {
            angle: k as f64 * 0.37,
        };
        let (u, v) = (m.eigenvector(0), m.eigenvector(1));
        assert!((u[0] * u[0] + u[1] * u[1] - 1.0).abs() < 1e-12);
        assert!((u[0] * v[0] + u[1] * v[1]).abs() < 1e-12);
        // O u = u and O v = -v for O = [[cos, sin], [sin, -cos]].
        let (c, s) = (m.angle.cos(), m.angle.sin());
        assert!((c * u[0] + s * u[1] - u[0]).abs() < 1e-12);
        assert!((s * v[0] - c * v[1] + v[1]).abs() < 1e-12);
    }
}

#[test]
fn strategy_validation() {
    assert_eq!(
        QuantumStrategy::new(vec![], vec![0.0], vec![0.0]),
        Err(QuantumError::NoSettings("A".into()))
    );
    assert!(matches!(
        QuantumStrategy::new(vec![f64::NAN], vec![0.0], vec![0.0]),
        Err(QuantumError::NonFinite(_))
    ));
    let mut s = uniform(0.0, 0.0, 0.0);
    s.angles.remove("C");
    assert_eq!(ghz_behavior(&s), Err(QuantumError::Parties));
}

#[test]
fn search_finds_mao_violation() {
    let r = search_max_violation(&mao_inequality(), &SearchConfig::default()).unwrap();
    assert!(r.value > 4.1, "{}", r.value);
    assert!((r.value - (2.0 + 2.0 * SQRT_2)).abs() < 1e-6, "{}", r.value);
    let alt = observable_value(&mao_inequality(), &r.strategy).unwrap();
    assert!((alt - r.value).abs() < 1e-9);
}

#[test]
fn search_finds_cao_violation() {
    let r = search_max_violation(&cao_inequality(), &SearchConfig::default()).unwrap();
    assert!(r.value > 8.0, "{}", r.value);
    assert!((r.value - (4.0 + 4.0 * SQRT_2)).abs() < 1e-6, "{}", r.value);
}

#[test]
fn search_respects_trivial_bound() {
    let ineq = LinearInequality::new(
        "a0b0",
        Signature::tripartite_222(),
        vec![CorrelatorTerm::new(Rational::one(), &[("A", 0), ("B", 0)])],
        Rational::one(),
    )
    .unwrap();
    let r = search_max_violation(
        &ineq,
        &SearchConfig {
            grid: 8,
            refine: 1e-4,
        },
    )
    .unwrap();
    assert!(r.value <= 1.0 + 1e-9, "{r:?}");
    assert!(r.value > 1.0 - 1e-9, "{r:?}");
}

#[test]
fn search_is_deterministic() {
    let cfg = SearchConfig {
        grid: 6,
        refine: 1e-3,
    };
    let a = search_max_violation(&mao_inequality(), &cfg).unwrap();
    let b = search_max_violation(&mao_inequality(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn search_handles_three_settings() {
    let r = search_max_violation(
        &cao_s14_linearized(),
        &SearchConfig {
            grid: 4,
            refine: 1e-3,
        },
    )
    .unwrap();
    assert_eq!(r.strategy.party("B").len(), 3);
    let alt = observable_value(&cao_s14_linearized(), &r.strategy).unwrap();
    assert!((alt - r.value).abs() < 1e-9);
}

#[test]
fn search_rejects_foreign_signature() {
    let sig = Signature::new(&["A", "B"], &[2, 2]);
    let ineq = LinearInequality::zero(sig);
    assert_eq!(
        search_max_violation(&ineq, &SearchConfig::default()).unwrap_err(),
        QuantumError::Signature
    );
}

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

fn strategy() -> impl Strategy<Value = QuantumStrategy> {
    prop::collection::vec(angle(), 6).prop_map(|v| {
        QuantumStrategy::new(v[0..2].to_vec(), v[2..4].to_vec(), v[4..6].to_vec()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn behavior_is_normalized_and_nonsignaling(s in strategy()) {
        let t = ghz_behavior(&s).unwrap();
        prop_assert!(t.check_normalized(1e-12).is_ok());
        prop_assert!(t.data().iter().all(|v| *v >= -1e-15));
        prop_assert!(max_signaling(&t) < 1e-10);
        // One-party marginals are uniform.
        for party in PARTIES {
            for x in 0..2 {
                let m = correlator(&t, &[(party, x)], 1e-10).unwrap();
                prop_assert!(m.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permuting_parties_permutes_behavior(s in strategy()) {
        let t = ghz_behavior(&s).unwrap();
        let (a, b, c) = (s.party("A").to_vec(), s.party("B").to_vec(), s.party("C").to_vec());
        let u = ghz_behavior(&QuantumStrategy::new(c, b, a).unwrap()).unwrap();
        for x in 0..8 {
            for o in 0..8 {
                let x = [x >> 2 & 1, x >> 1 & 1, x & 1];
                let o = [o >> 2 & 1, o >> 1 & 1, o & 1];
                let v1 = p(&t, x, o);
                let v2 = p(&u, [x[2], x[1], x[0]], [o[2], o[1], o[0]]);
                prop_assert!((v1 - v2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn observable_route_matches_table_route(s in strategy()) {
        for ineq in [mao_inequality(), cao_inequality()] {
            let v1 = evaluate_strategy(&ineq, &s).unwrap();
            let v2 = observable_value(&ineq, &s).unwrap();
            prop_assert!((v1 - v2).abs() < 1e-9);
        }
    }
}

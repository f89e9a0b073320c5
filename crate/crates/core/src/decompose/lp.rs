//! Exact-rational feasibility LP: find `p >= 0` with `A p = b`.
//!
//! Phase one of the simplex method on `A p + s = b`, `s >= 0` (rows with
//! negative right-hand side are negated first), minimizing `sum s` with
//! Bland's rule. When the optimum is positive the phase-one duals give a
//! Farkas certificate `y` with `y.A_j <= 0` for every column and `y.b > 0`.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    Infeasible { y: Vec<Rational> },
}

/// `a` is row-major with `b.len()` rows of equal length.
pub fn feasibility(a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let m = b.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs = n + m;
    let mut flip = vec![false; m];
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for i in 0..m {
        assert_eq!(a[i].len(), n, "ragged constraint matrix");
        flip[i] = b[i].is_negative();
        let mut row = Vec::with_capacity(width);
        for v in &a[i] {
            row.push(if flip[i] { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        row.push(if flip[i] { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the phase-one objective; the last entry holds minus
    // the objective value.
    let mut d = vec![Rational::zero(); width];
    for j in n..n + m {
        d[j] = Rational::one();
    }
    for row in &t {
        for j in 0..width {
            if !row[j].is_zero() {
                d[j] -= &row[j];
            }
        }
    }
    loop {
        let Some(enter) = (0..rhs).find(|&j| d[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][rhs] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a ratio always exists.
        let (r, _) = leave.expect("phase-one objective is bounded");
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        let f = d[enter].clone();
        for (v, p) in d.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
        basis[r] = enter;
    }
    let objective = -d[rhs].clone();
    if objective.is_zero() {
        let mut p = vec![Rational::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                p[j] = t[i][rhs].clone();
            }
        }
        LpOutcome::Feasible(p)
    } else {
        let y = (0..m)
            .map(|i| {
                let yi = Rational::one() - &d[n + i];
                if flip[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        LpOutcome::Infeasible { y }
    }
}

/// Checks a claimed solution or certificate against the constraints.
pub fn verify(a: &[Vec<Rational>], b: &[Rational], outcome: &LpOutcome) -> bool {
    let n = a.first().map_or(0, Vec::len);
    match outcome {
        LpOutcome::Feasible(p) => {
            p.len() == n
                && p.iter().all(|v| !v.is_negative())
                && a.iter().zip(b).all(|(row, bi)| {
                    let lhs: Rational = row
                        .iter()
                        .zip(p)
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(x, v)| x * v)
                        .sum();
                    lhs == *bi
                })
        }
        LpOutcome::Infeasible { y } => {
            let yb: Rational = y.iter().zip(b).map(|(u, v)| u * v).sum();
            yb.is_positive()
                && (0..n).all(|j| {
                    let s: Rational = y.iter().zip(a).map(|(u, row)| u * &row[j]).sum();
                    !s.is_positive()
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    #[test]
    fn simple_feasible() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let b = vec![int(1), ratio(1, 2)];
        let out = feasibility(&a, &b);
        assert!(matches!(out, LpOutcome::Feasible(_)));
        assert!(verify(&a, &b, &out));
    }

    #[test]
    fn infeasible_with_certificate() {
        // p1 + p2 = 1 and p1 + p2 = 2.
        let a = m(&[&[1, 1], &[1, 1]]);
        let b = vec![int(1), int(2)];
        let out = feasibility(&a, &b);
        assert!(matches!(out, LpOutcome::Infeasible { .. }));
        assert!(verify(&a, &b, &out));
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        let a = m(&[&[-1, 0], &[-1, 0], &[0, 1]]);
        let b = vec![int(-2), int(-2), int(3)];
        let out = feasibility(&a, &b);
        assert_eq!(out, LpOutcome::Feasible(vec![int(2), int(3)]));
        let b = vec![int(2), int(2), int(3)];
        let out = feasibility(&a, &b);
        assert!(matches!(out, LpOutcome::Infeasible { .. }));
        assert!(verify(&a, &b, &out));
    }

    #[test]
    fn empty_columns() {
        let a: Vec<Vec<Rational>> = vec![vec![], vec![]];
        assert!(
            matches!(feasibility(&a, &[int(0), int(0)]), LpOutcome::Feasible(ref p) if p.is_empty())
        );
        let out = feasibility(&a, &[int(1), int(0)]);
        assert!(verify(&a, &[int(1), int(0)], &out));
    }
}

//! Exact feasibility of `A x = b, x >= 0` by the two-phase simplex method's first phase.
//!
//! Runs over any ordered [`Field`]; with rationals the verdict and its certificate are exact.

use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub enum LpVerdict<T> {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<T>),
    /// A Farkas vector `y` with `y^T A >= 0` componentwise and `y^T b < 0`.
    Infeasible(Vec<T>),
}

impl<T> LpVerdict<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpVerdict::Feasible(_))
    }
}

/// Decides `exists x >= 0: A x = b` with Bland's anti-cycling rule.
pub fn solve_feasibility<T: Field>(a: &[Vec<T>], b: &[T]) -> LpVerdict<T> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|row| row.len() == n), "ragged constraint matrix");

    // Flip rows so the right-hand side is nonnegative; artificials then start basic.
    let flip: Vec<bool> = b.iter().map(|x| *x < T::zero()).collect();
    let width = n + m + 1;
    let mut t: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let sign = if flip[i] { -T::one() } else { T::one() };
            let mut row = vec![T::zero(); width];
            for j in 0..n {
                row[j] = a[i][j].clone() * sign.clone();
            }
            row[n + i] = T::one();
            row[width - 1] = b[i].clone() * sign;
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of the phase-one objective (sum of artificials); last entry is -objective.
    let mut cost = vec![T::zero(); width];
    for j in (0..n).chain(std::iter::once(width - 1)) {
        let mut s = T::zero();
        for row in &t {
            s = s + row[j].clone();
        }
        cost[j] = -s;
    }

    while let Some(enter) = (0..n + m).find(|&j| cost[j] < T::zero()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > T::zero() {
                leave = match leave {
                    None => Some(i),
                    Some(r) => {
                        let lhs = t[i][width - 1].clone() * t[r][enter].clone();
                        let rhs = t[r][width - 1].clone() * t[i][enter].clone();
                        if lhs < rhs || (lhs == rhs && basis[i] < basis[r]) {
                            Some(i)
                        } else {
                            Some(r)
                        }
                    }
                };
            }
        }
        // The phase-one objective is bounded below by zero, so a pivot row always exists.
        let r = leave.expect("phase-one objective is bounded");
        pivot(&mut t, &mut cost, r, enter);
        basis[r] = enter;
    }

    let objective = -cost[width - 1].clone();
    if objective > T::zero() {
        // Dual of phase one: y_i = 1 - reduced cost of artificial i. Negate and undo the row flips.
        let y = (0..m)
            .map(|i| {
                let yi = cost[n + i].clone() - T::one();
                if flip[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        return LpVerdict::Infeasible(y);
    }
    let mut x = vec![T::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1].clone();
        }
    }
    LpVerdict::Feasible(x)
}

fn pivot<T: Field>(t: &mut [Vec<T>], cost: &mut [T], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v = v.clone() - f.clone() * pv.clone();
        }
    }
}

/// Checks a verdict against the system it claims to decide.
pub fn verify_verdict<T: Field>(a: &[Vec<T>], b: &[T], verdict: &LpVerdict<T>) -> bool {
    let n = a.first().map_or(0, Vec::len);
    match verdict {
        LpVerdict::Feasible(x) => {
            x.len() == n
                && x.iter().all(|v| *v >= T::zero())
                && a.iter().zip(b).all(|(row, bi)| {
                    let mut s = T::zero();
                    for (aij, xj) in row.iter().zip(x) {
                        s = s + aij.clone() * xj.clone();
                    }
                    s == *bi
                })
        }
        LpVerdict::Infeasible(y) => {
            let mut yb = T::zero();
            for (yi, bi) in y.iter().zip(b) {
                yb = yb + yi.clone() * bi.clone();
            }
            yb < T::zero()
                && (0..n).all(|j| {
                    let mut s = T::zero();
                    for (yi, row) in y.iter().zip(a) {
                        s = s + yi.clone() * row[j].clone();
                    }
                    s >= T::zero()
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};

    fn q(n: i64) -> Exact {
        ratio(n, 1)
    }

    #[test]
    fn simple_feasible_system() {
        // x + y = 1, x - y = 0 -> x = y = 1/2.
        let a = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        let b = vec![q(1), q(0)];
        let v = solve_feasibility(&a, &b);
        assert_eq!(v, LpVerdict::Feasible(vec![ratio(1, 2), ratio(1, 2)]));
        assert!(verify_verdict(&a, &b, &v));
    }

    #[test]
    fn negative_rhs_with_nonnegative_columns_is_infeasible() {
        let a = vec![vec![q(1), q(2)]];
        let b = vec![q(-1)];
        let v = solve_feasibility(&a, &b);
        assert!(!v.is_feasible());
        assert!(verify_verdict(&a, &b, &v));
    }

    #[test]
    fn contradictory_equalities() {
        // x + y = 1 and x + y = 2.
        let a = vec![vec![q(1), q(1)], vec![q(1), q(1)]];
        let b = vec![q(1), q(2)];
        let v = solve_feasibility(&a, &b);
        assert!(verify_verdict(&a, &b, &v));
        assert!(!v.is_feasible());
    }

    #[test]
    fn redundant_rows_are_handled() {
        let a = vec![vec![q(1), q(1), q(0)], vec![q(2), q(2), q(0)], vec![q(0), q(1), q(1)]];
        let b = vec![q(1), q(2), q(1)];
        let v = solve_feasibility(&a, &b);
        assert!(v.is_feasible());
        assert!(verify_verdict(&a, &b, &v));
    }

    #[test]
    fn works_over_floats() {
        let a = vec![vec![1.0, 1.0]];
        let v = solve_feasibility(&a, &[0.5]);
        assert!(v.is_feasible());
    }
}

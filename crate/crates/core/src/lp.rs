//! Small dense simplex for `max c'x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible at the origin, so no phase one is needed.
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable on ratio ties) rules out cycling and makes the pivot sequence
//! deterministic.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Optimal dual values, one per constraint row.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl DenseLp {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Lp(format!("{} rows but {} bounds", a.len(), b.len())));
        }
        if let Some(row) = a.iter().find(|r| r.len() != c.len()) {
            return Err(Error::Lp(format!(
                "row has {} columns, objective has {}",
                row.len(),
                c.len()
            )));
        }
        if let Some(bi) = b.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Lp(format!("right-hand sides must be >= 0, got {bi}")));
        }
        Ok(Self { c, a, b })
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let m = self.a.len();
        let n = self.c.len();
        let width = n + m + 1;
        let rhs = n + m;
        let mut t = vec![vec![0.0; width]; m + 1];
        for i in 0..m {
            t[i][..n].copy_from_slice(&self.a[i]);
            t[i][n + i] = 1.0;
            t[i][rhs] = self.b[i];
        }
        for j in 0..n {
            t[m][j] = -self.c[j];
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut trace: Vec<(usize, usize)> = Vec::new();

        for pivots in 0..=MAX_PIVOTS {
            let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) else {
                let mut x = vec![0.0; n];
                for (i, &bv) in basis.iter().enumerate() {
                    if bv < n {
                        x[bv] = t[i][rhs];
                    }
                }
                let duals = (0..m).map(|i| t[m][n + i]).collect();
                return Ok(LpSolution {
                    objective: t[m][rhs],
                    x,
                    duals,
                    pivots,
                });
            };

            let ratio = |i: usize| t[i][rhs] / t[i][enter];
            let eligible = |i: &usize| t[*i][enter] > PIVOT_TOL;
            let min_ratio = (0..m).filter(eligible).map(ratio).fold(f64::INFINITY, f64::min);
            if !min_ratio.is_finite() {
                return Err(Error::Lp(format!("unbounded in column {enter}")));
            }
            let row = (0..m)
                .filter(eligible)
                .filter(|&i| ratio(i) <= min_ratio + PIVOT_TOL * (1.0 + min_ratio))
                .min_by_key(|&i| basis[i])
                .expect("at least one row attains the minimum ratio");

            let pivot = t[row][enter];
            for v in t[row].iter_mut() {
                *v /= pivot;
            }
            let pivot_row = t[row].clone();
            for (i, r) in t.iter_mut().enumerate() {
                if i == row {
                    continue;
                }
                let factor = r[enter];
                if factor != 0.0 {
                    for (v, p) in r.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
            basis[row] = enter;
            trace.push((enter, row));
        }
        let tail: Vec<String> = trace
            .iter()
            .rev()
            .take(10)
            .map(|(e, r)| format!("col {e} -> row {r}"))
            .collect();
        Err(Error::Lp(format!(
            "no convergence after {MAX_PIVOTS} pivots; last pivots: {}",
            tail.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_certificate(lp: &DenseLp, sol: &LpSolution) {
        for (row, &b) in lp.a.iter().zip(&lp.b) {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            assert!(lhs <= b + 1e-9);
        }
        assert!(sol.x.iter().all(|&x| x >= -1e-12));
        assert!(sol.duals.iter().all(|&y| y >= -1e-12));
        for j in 0..lp.c.len() {
            let col: f64 = lp.a.iter().zip(&sol.duals).map(|(r, y)| r[j] * y).sum();
            assert!(col >= lp.c[j] - 1e-9);
        }
        let dual_obj: f64 = lp.b.iter().zip(&sol.duals).map(|(b, y)| b * y).sum();
        assert_close!(dual_obj, sol.objective, 1e-9);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let lp = DenseLp::new(
            vec![3.0, 5.0],
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            vec![4.0, 12.0, 18.0],
        )
        .unwrap();
        let sol = lp.solve().unwrap();
        assert_close!(sol.objective, 36.0, 1e-12);
        assert_close!(sol.x[0], 2.0, 1e-12);
        assert_close!(sol.x[1], 6.0, 1e-12);
        check_certificate(&lp, &sol);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example under the largest-coefficient rule.
        let lp = DenseLp::new(
            vec![10.0, -57.0, -9.0, -24.0],
            vec![
                vec![0.5, -5.5, -2.5, 9.0],
                vec![0.5, -1.5, -0.5, 1.0],
                vec![1.0, 0.0, 0.0, 0.0],
            ],
            vec![0.0, 0.0, 1.0],
        )
        .unwrap();
        let sol = lp.solve().unwrap();
        assert_close!(sol.objective, 1.0, 1e-12);
        check_certificate(&lp, &sol);
    }

    #[test]
    fn unbounded_is_reported() {
        let lp = DenseLp::new(vec![1.0, 1.0], vec![vec![1.0, -1.0]], vec![1.0]).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Lp(_))));
    }

    #[test]
    fn rejects_negative_rhs() {
        assert!(DenseLp::new(vec![1.0], vec![vec![1.0]], vec![-1.0]).is_err());
    }
}

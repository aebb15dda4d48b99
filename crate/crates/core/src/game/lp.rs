//! Dense tableau simplex for the zero-sum maximin program.
//!
//! After shifting the payoffs so every entry is positive, the column player's
//! problem becomes `max 1ᵀq  s.t.  A q ≤ 1, q ≥ 0`, whose origin is feasible,
//! so a single phase suffices. The row player's optimal strategy is read off
//! the reduced costs of the slack columns at optimality.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;

pub(crate) struct MaximinSolution {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub value: f64,
}

/// Solves the zero-sum game where the row player maximizes `xᵀ U y`.
pub(crate) fn solve_maximin(u: &DMatrix<f64>) -> Result<MaximinSolution> {
    let (m, n) = u.shape();
    let shift = 1.0 - u.min();
    let a = u.add_scalar(shift);

    // Tableau layout: columns [q_1..q_n | s_1..s_m | rhs]; row m is the objective.
    let width = n + m + 1;
    let mut t = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = 1.0;
    }
    for j in 0..n {
        t[(m, j)] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Bland's rule bounds the pivot count; this cap only guards against bugs.
    let max_pivots = 50 * (m + n + 1) * (m + n + 1);
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&c| t[(m, c)] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let coef = t[(r, enter)];
            if coef > PIVOT_EPS {
                let ratio = t[(r, width - 1)] / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        if ratio < best_ratio - PIVOT_EPS
                            || (ratio <= best_ratio + PIVOT_EPS && basis[r] < basis[best])
                        {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Solver("maximin LP reported unbounded".into()));
        };
        pivot(&mut t, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("no convergence after {pivots} pivots")));
        }
    }

    let mut q = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            q[b] = t[(r, width - 1)];
        }
    }
    let total = t[(m, width - 1)];
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Solver(format!("degenerate optimum {total}")));
    }
    let p: Vec<f64> = (0..m).map(|i| t[(m, n + i)].max(0.0)).collect();

    let normalize = |v: Vec<f64>| -> Result<Vec<f64>> {
        let s: f64 = v.iter().sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Solver(format!("strategy weights sum to {s}")));
        }
        Ok(v.into_iter().map(|w| w.max(0.0) / s).collect())
    };

    Ok(MaximinSolution {
        row_strategy: normalize(p)?,
        col_strategy: normalize(q)?,
        value: 1.0 / total - shift,
    })
}

fn pivot(t: &mut DMatrix<f64>, row: usize, col: usize) {
    let p = t[(row, col)];
    let width = t.ncols();
    for c in 0..width {
        t[(row, c)] /= p;
    }
    for r in 0..t.nrows() {
        if r == row {
            continue;
        }
        let f = t[(r, col)];
        if f != 0.0 {
            for c in 0..width {
                let delta = f * t[(row, c)];
                t[(r, c)] -= delta;
            }
        }
    }
}

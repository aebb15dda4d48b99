use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::game::{EquilibriumInfo, PayoffMatrix};
use crate::strategy::{mixed_payoff, MixedStrategy, ReactiveStrategy};

/// A nonzero direction whose components sum to zero, i.e. a tangent
/// direction of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumVector(DVector<f64>);

impl ZeroSumVector {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.len() < 2 {
            return Err(Error::NotZeroSum(format!("length {} < 2", delta.len())));
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotZeroSum("non-finite component".into()));
        }
        let scale = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::NotZeroSum("zero vector".into()));
        }
        let sum: f64 = delta.iter().sum();
        if sum.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::NotZeroSum(format!("components sum to {sum}")));
        }
        Ok(Self(DVector::from_vec(delta)))
    }

    /// `e_k - e_{k+1}` (zero-based `k`).
    pub fn adjacent_difference(n: usize, k: usize) -> Result<Self> {
        if k + 1 >= n {
            return Err(Error::InvalidIndex { index: k + 1, dim: n });
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        v[k + 1] = -1.0;
        Self::new(v)
    }

    /// The `n - 1` vectors `e_k - e_{k+1}`, which span all zero-sum directions.
    pub fn spanning_set(n: usize) -> Vec<Self> {
        (0..n.saturating_sub(1))
            .map(|k| Self::adjacent_difference(n, k).expect("index in range"))
            .collect()
    }

    /// `x - x*` for a probe strategy `x ≠ x*`.
    pub fn probe(x: &MixedStrategy, x_star: &MixedStrategy) -> Result<Self> {
        check_dim("probe strategy", x_star.len(), x.len())?;
        Self::new((x.probs() - x_star.probs()).as_slice().to_vec())
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Entrywise `log X`; a zero entry makes the Lyapunov function undefined.
fn log_strategy(x: &ReactiveStrategy) -> Result<DMatrix<f64>> {
    let p = x.probs();
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            if p[(i, j)] <= 0.0 {
                return Err(Error::LogOfZero { row: i, col: j });
            }
        }
    }
    Ok(p.map(f64::ln))
}

fn quadratic_form(
    game: &PayoffMatrix,
    x_like: &DMatrix<f64>,
    delta: &ZeroSumVector,
) -> Result<f64> {
    check_dim("Lyapunov function (rows of X)", game.rows(), x_like.nrows())?;
    check_dim("Lyapunov function (columns of X)", game.cols(), x_like.ncols())?;
    check_dim("Lyapunov function (delta)", game.rows(), delta.len())?;
    // δᵀ U Mᵀ δ = (Uᵀ δ) · (Mᵀ δ)
    let d = delta.as_vector();
    let u_d = game.entries().transpose() * d;
    let m_d = x_like.transpose() * d;
    Ok(u_d.dot(&m_d))
}

/// `H(X; δ) = δᵀ U (log X)ᵀ δ`, non-decreasing along the replicator flow.
pub fn lyapunov_h(game: &PayoffMatrix, x: &ReactiveStrategy, delta: &ZeroSumVector) -> Result<f64> {
    quadratic_form(game, &log_strategy(x)?, delta)
}

/// `H(X; δ) = δᵀ U Xᵀ δ`, the counterpart of [`lyapunov_h`] for gradient
/// descent-ascent.
pub fn gda_lyapunov(game: &PayoffMatrix, x: &ReactiveStrategy, delta: &ZeroSumVector) -> Result<f64> {
    quadratic_form(game, x.probs(), delta)
}

/// Rate of change of the Lyapunov family, `(δᵀ U dy)²` with `dy = y - y*`.
/// Shared by the replicator and gradient descent-ascent versions.
pub fn lyapunov_rate(
    game: &PayoffMatrix,
    y: &MixedStrategy,
    delta: &ZeroSumVector,
    eq: &EquilibriumInfo,
) -> Result<f64> {
    check_dim("Lyapunov rate (delta)", game.rows(), delta.len())?;
    check_dim("Lyapunov rate (y)", game.cols(), y.len())?;
    check_dim("Lyapunov rate (y*)", game.cols(), eq.y_star.len())?;
    let dy = y.probs() - eq.y_star.probs();
    let s = delta.as_vector().dot(&(game.entries() * dy));
    Ok(s * s)
}

/// `|xᵀ U y - u*|²`, the squared deviation of the realized payoff from the
/// game value.
pub fn exploitability(
    game: &PayoffMatrix,
    x: &MixedStrategy,
    y: &MixedStrategy,
    eq: &EquilibriumInfo,
) -> Result<f64> {
    let d = mixed_payoff(game, x, y)? - eq.value;
    Ok(d * d)
}

/// Log-odds `q_j = log x_j - log(1 - x_j)` of the first row of a 2×2
/// reactive strategy.
pub fn log_odds_q(x: &ReactiveStrategy) -> Result<(f64, f64)> {
    if x.rows() != 2 {
        return Err(Error::NotTwoAction(x.rows()));
    }
    if x.cols() != 2 {
        return Err(Error::NotTwoAction(x.cols()));
    }
    let p = x.probs();
    let q = |j: usize| -> Result<f64> {
        let v = p[(0, j)];
        if v <= 0.0 {
            return Err(Error::LogOfZero { row: 0, col: j });
        }
        if v >= 1.0 {
            return Err(Error::LogOfZero { row: 1, col: j });
        }
        Ok(v.ln() - p[(1, j)].ln())
    };
    Ok((q(0)?, q(1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_matching_pennies, solve_nash, DEFAULT_NASH_TOL};

    fn two_by_two(x1: f64, x2: f64) -> ReactiveStrategy {
        ReactiveStrategy::from_columns(&[vec![x1, 1.0 - x1], vec![x2, 1.0 - x2]]).unwrap()
    }

    #[test]
    fn zero_sum_vector_validation() {
        assert!(ZeroSumVector::new(vec![1.0, -1.0]).is_ok());
        assert!(ZeroSumVector::new(vec![1.0, -0.9]).is_err());
        assert!(ZeroSumVector::new(vec![0.0, 0.0]).is_err());
        assert!(ZeroSumVector::new(vec![1.0]).is_err());
        let set = ZeroSumVector::spanning_set(4);
        assert_eq!(set.len(), 3);
        assert_eq!(set[1].as_slice(), &[0.0, 1.0, -1.0, 0.0]);
        let half = MixedStrategy::uniform(2);
        assert!(ZeroSumVector::probe(&half, &half).is_err());
    }

    #[test]
    fn h_closed_form_matching_pennies() {
        let mp = make_matching_pennies();
        let x = two_by_two(0.8, 0.35);
        let (q1, q2) = log_odds_q(&x).unwrap();
        let delta = ZeroSumVector::new(vec![0.3, -0.3]).unwrap();
        let h = lyapunov_h(&mp, &x, &delta).unwrap();
        assert!((h - 2.0 * 0.09 * (q1 - q2)).abs() < 1e-14);

        let neg = ZeroSumVector::new(vec![-0.3, 0.3]).unwrap();
        assert_eq!(h, lyapunov_h(&mp, &x, &neg).unwrap());
    }

    #[test]
    fn h_vanishes_for_uniform_x() {
        let mp = make_matching_pennies();
        let delta = ZeroSumVector::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(lyapunov_h(&mp, &ReactiveStrategy::uniform(2, 2), &delta).unwrap(), 0.0);
    }

    #[test]
    fn h_rejects_zero_entry() {
        let mp = make_matching_pennies();
        let delta = ZeroSumVector::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(
            lyapunov_h(&mp, &two_by_two(1.0, 0.5), &delta),
            Err(Error::LogOfZero { row: 1, col: 0 })
        );
    }

    #[test]
    fn rate_examples() {
        let mp = make_matching_pennies();
        let eq = solve_nash(&mp, DEFAULT_NASH_TOL).unwrap();
        let delta = ZeroSumVector::new(vec![0.25, -0.25]).unwrap();
        assert_eq!(lyapunov_rate(&mp, &eq.y_star, &delta, &eq).unwrap(), 0.0);

        let y = MixedStrategy::new(vec![0.9, 0.1]).unwrap();
        let rate = lyapunov_rate(&mp, &y, &delta, &eq).unwrap();
        assert!((rate - 16.0 * 0.0625 * 0.16).abs() < 1e-15);

        let x = MixedStrategy::new(vec![1.0, 0.0]).unwrap();
        let probe = ZeroSumVector::probe(&x, &eq.x_star).unwrap();
        let e = exploitability(&mp, &x, &y, &eq).unwrap();
        assert!((lyapunov_rate(&mp, &y, &probe, &eq).unwrap() - e).abs() < 1e-15);
    }

    #[test]
    fn exploitability_examples() {
        let mp = make_matching_pennies();
        let eq = solve_nash(&mp, DEFAULT_NASH_TOL).unwrap();
        assert_eq!(exploitability(&mp, &eq.x_star, &eq.y_star, &eq).unwrap(), 0.0);
        let pure = MixedStrategy::pure(2, 0).unwrap();
        assert_eq!(exploitability(&mp, &pure, &pure, &eq).unwrap(), 1.0);
    }

    #[test]
    fn log_odds_examples() {
        assert_eq!(log_odds_q(&ReactiveStrategy::uniform(2, 2)).unwrap(), (0.0, 0.0));
        let (q1, _) = log_odds_q(&two_by_two(0.8, 0.5)).unwrap();
        assert!((q1 - 4.0f64.ln()).abs() < 1e-15);
        assert!((q1 - 1.3863).abs() < 1e-4);
        for (a, b) in [(0.3, 0.6), (0.9, 0.2), (0.5, 0.5)] {
            let (q1, q2) = log_odds_q(&two_by_two(a, b)).unwrap();
            assert_eq!((q1 - q2).partial_cmp(&0.0), (a - b).partial_cmp(&0.0));
        }
        assert!(matches!(
            log_odds_q(&ReactiveStrategy::uniform(3, 2)),
            Err(Error::NotTwoAction(3))
        ));
        assert!(log_odds_q(&two_by_two(1.0, 0.5)).is_err());
    }

    #[test]
    fn gda_h_is_bilinear_form() {
        let mp = make_matching_pennies();
        let x = two_by_two(0.8, 0.35);
        let delta = ZeroSumVector::new(vec![1.0, -1.0]).unwrap();
        // δᵀ U Xᵀ δ with δ = (1, -1): 2·((x1 - (1-x1)) - (x2 - (1-x2))) = 4(x1 - x2)
        let h = gda_lyapunov(&mp, &x, &delta).unwrap();
        assert!((h - 4.0 * (0.8 - 0.35)).abs() < 1e-14);
    }
}

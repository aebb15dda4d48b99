//! Strategies of the two players and the stationary quantities of the
//! repeated game.
//!
//! X is the reactive player: its strategy is a matrix whose column `j` is the
//! distribution over X's actions given that Y played `b_j` in the previous
//! round. Y is memoryless and plays a single mixed strategy. In the repeated
//! game the stationary distribution of X's actions is `x_st = X y`, and the
//! joint action distribution is the outer product `x_st ⊗ y`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::game::PayoffMatrix;

/// Absolute tolerance on a probability block's sum for it to count as valid.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Blocks whose sum is off by less than this are silently renormalized by
/// the constructors; anything beyond is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;

fn normalize_block(values: &mut [f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::NotOnSimplex(format!("{what} is empty")));
    }
    for (k, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NotOnSimplex(format!("{what}[{k}] = {v} is not finite")));
        }
        if *v < 0.0 {
            if *v < -SIMPLEX_TOL {
                return Err(Error::NotOnSimplex(format!("{what}[{k}] = {v} is negative")));
            }
            *v = 0.0;
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Error::NotOnSimplex(format!("{what} sums to {sum}")));
    }
    // Sums already within rounding of 1 are left alone so that stored
    // distributions reload bit-for-bit.
    if (sum - 1.0).abs() > 4.0 * f64::EPSILON * values.len() as f64 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

/// A single distribution over actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(DVector<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        normalize_block(&mut probs, "mixed strategy")?;
        Ok(Self(DVector::from_vec(probs)))
    }

    pub fn uniform(n: usize) -> Self {
        Self(DVector::from_element(n, 1.0 / n as f64))
    }

    /// Point mass on `action`.
    pub fn pure(n: usize, action: usize) -> Result<Self> {
        if action >= n {
            return Err(Error::InvalidIndex { index: action, dim: n });
        }
        let mut v = DVector::zeros(n);
        v[action] = 1.0;
        Ok(Self(v))
    }

    pub(crate) fn from_vector_unchecked(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn probs(&self) -> &DVector<f64> {
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

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0.as_slice().to_vec()
    }
}

/// X's memory-one strategy: entry `(i, j)` is the probability of playing
/// `a_i` after the opponent played `b_j`. Every column is a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactiveStrategy(DMatrix<f64>);

impl ReactiveStrategy {
    /// Validates (and, within [`RENORMALIZE_TOL`], renormalizes) every column.
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        let mut probs = probs;
        if probs.nrows() == 0 || probs.ncols() == 0 {
            return Err(Error::NotOnSimplex("reactive strategy is empty".into()));
        }
        for j in 0..probs.ncols() {
            let mut col = probs.column_mut(j);
            normalize_block(col.as_mut_slice(), "reactive strategy column")?;
        }
        Ok(Self(probs))
    }

    /// Builds the strategy from its conditional columns `x_j`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m_y = columns.len();
        let m_x = columns.first().map_or(0, Vec::len);
        for c in columns {
            check_dim("reactive strategy column", m_x, c.len())?;
        }
        let flat: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(DMatrix::from_vec(m_x, m_y, flat))
    }

    /// A reactive strategy that ignores memory: every column equals `x`.
    pub fn memoryless(x: &MixedStrategy, m_y: usize) -> Self {
        Self(DMatrix::from_fn(x.len(), m_y, |i, _| x.0[i]))
    }

    pub fn uniform(m_x: usize, m_y: usize) -> Self {
        Self(DMatrix::from_element(m_x, m_y, 1.0 / m_x as f64))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Column-major storage, `x_{1|1}, x_{2|1}, …, x_{m_X|m_Y}`.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Number of X's actions.
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    /// Number of Y's actions (one column per opponent action).
    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// The conditional distribution `x_j` after the opponent played `b_j`.
    pub fn column(&self, j: usize) -> DVector<f64> {
        self.0.column(j).into_owned()
    }
}

/// The integrated state of the learning dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub x: ReactiveStrategy,
    pub y: MixedStrategy,
}

impl JointState {
    pub fn new(x: ReactiveStrategy, y: MixedStrategy) -> Result<Self> {
        check_dim("joint state (columns of X vs. length of y)", x.cols(), y.len())?;
        Ok(Self { x, y })
    }

    pub fn check_game(&self, game: &PayoffMatrix) -> Result<()> {
        check_dim("joint state rows vs. X's actions", game.rows(), self.x.rows())?;
        check_dim("joint state columns vs. Y's actions", game.cols(), self.x.cols())
    }

    /// Flattened state: X column-major followed by y.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.flat_len());
        v.extend_from_slice(self.x.as_slice());
        v.extend_from_slice(self.y.as_slice());
        v
    }

    pub fn flat_len(&self) -> usize {
        self.x.rows() * self.x.cols() + self.y.len()
    }

    pub(crate) fn from_flat_unchecked(m_x: usize, m_y: usize, flat: &[f64]) -> Self {
        let split = m_x * m_y;
        Self {
            x: ReactiveStrategy::from_matrix_unchecked(DMatrix::from_column_slice(
                m_x,
                m_y,
                &flat[..split],
            )),
            y: MixedStrategy::from_vector_unchecked(DVector::from_column_slice(&flat[split..])),
        }
    }

    /// Largest violation of the simplex constraints (negative mass or a
    /// column/vector sum away from one).
    pub fn simplex_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for col in self.x.0.column_iter() {
            worst = worst.max((col.sum() - 1.0).abs());
            worst = worst.max(-col.min());
        }
        worst = worst.max((self.y.0.sum() - 1.0).abs());
        worst.max(-self.y.0.min())
    }
}

/// Stationary distribution of the repeated game.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub x_st: DVector<f64>,
    /// `joint[(i, j)] = x_st[i] * y[j]`.
    pub joint: DMatrix<f64>,
}

/// `x_st_i = Σ_j x_{i|j} y_j`.
pub fn stationary_strategy(x: &ReactiveStrategy, y: &MixedStrategy) -> Result<DVector<f64>> {
    check_dim("stationary strategy", x.cols(), y.len())?;
    Ok(&x.0 * &y.0)
}

pub fn stationary_state(x: &ReactiveStrategy, y: &MixedStrategy) -> Result<StationaryState> {
    let x_st = stationary_strategy(x, y)?;
    let joint = &x_st * y.0.transpose();
    Ok(StationaryState { x_st, joint })
}

/// X's expected stationary payoff `u_st = Σ_i Σ_j u_ij x_st_i y_j`.
pub fn expected_payoff(game: &PayoffMatrix, x: &ReactiveStrategy, y: &MixedStrategy) -> Result<f64> {
    check_dim("expected payoff rows", game.rows(), x.rows())?;
    let x_st = stationary_strategy(x, y)?;
    Ok(bilinear(game.entries(), &x_st, &y.0))
}

/// Payoff of a memoryless pair, `xᵀ U y`.
pub fn mixed_payoff(game: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    check_dim("mixed payoff rows", game.rows(), x.len())?;
    check_dim("mixed payoff cols", game.cols(), y.len())?;
    Ok(bilinear(game.entries(), &x.0, &y.0))
}

pub(crate) fn bilinear(m: &DMatrix<f64>, left: &DVector<f64>, right: &DVector<f64>) -> f64 {
    left.dot(&(m * right))
}

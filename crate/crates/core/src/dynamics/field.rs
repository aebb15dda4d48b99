//! Payoff gradients and the learning vector fields.

use nalgebra::{DMatrix, DVector};

use super::FieldKind;
use crate::error::{check_dim, Result};
use crate::game::PayoffMatrix;
use crate::strategy::{stationary_strategy, JointState, MixedStrategy, ReactiveStrategy};

fn check_state(game: &PayoffMatrix, x: &ReactiveStrategy, y: &MixedStrategy) -> Result<()> {
    check_dim("X rows vs. payoff rows", game.rows(), x.rows())?;
    check_dim("X columns vs. payoff columns", game.cols(), x.cols())?;
    check_dim("y vs. payoff columns", game.cols(), y.len())
}

/// Total derivative of X's stationary payoff with respect to `x_{i|j}`:
/// `y_j Σ_j' u_ij' y_j'`.
pub fn grad_x(game: &PayoffMatrix, x: &ReactiveStrategy, y: &MixedStrategy) -> Result<DMatrix<f64>> {
    check_state(game, x, y)?;
    let uy = game.entries() * y.probs();
    Ok(&uy * y.probs().transpose())
}

/// Total derivative of X's stationary payoff with respect to `y_j`, holding
/// X fixed: `Σ_i u_ij x_st_i + Σ_i x_{i|j} Σ_j' u_ij' y_j'`. The second term
/// comes from the dependence of `x_st` on `y`.
pub fn grad_y(game: &PayoffMatrix, x: &ReactiveStrategy, y: &MixedStrategy) -> Result<DVector<f64>> {
    check_state(game, x, y)?;
    let u = game.entries();
    let x_st = stationary_strategy(x, y)?;
    let uy = u * y.probs();
    Ok(u.transpose() * x_st + x.probs().transpose() * uy)
}

/// Time derivative of the state; `dx` shares X's column-major shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub dx: DMatrix<f64>,
    pub dy: DVector<f64>,
}

fn typed_field(
    kind: FieldKind,
    game: &PayoffMatrix,
    x: &ReactiveStrategy,
    y: &MixedStrategy,
) -> Result<FieldValue> {
    check_state(game, x, y)?;
    let (m_x, m_y) = (game.rows(), game.cols());
    let state = JointState {
        x: x.clone(),
        y: y.clone(),
    };
    let mut out = vec![0.0; m_x * m_y + m_y];
    Kernel::new(kind, game).eval(&state.to_flat(), &mut out);
    Ok(FieldValue {
        dx: DMatrix::from_column_slice(m_x, m_y, &out[..m_x * m_y]),
        dy: DVector::from_column_slice(&out[m_x * m_y..]),
    })
}

/// Replicator dynamics with memory asymmetry. X ascends and Y descends the
/// stationary payoff:
/// `dx_{i|j} = x_{i|j}(g_ij - Σ_i x_{i|j} g_ij)`,
/// `dy_j = -y_j(h_j - Σ_j y_j h_j)` with `g = grad_x`, `h = grad_y`.
pub fn replicator_field(
    game: &PayoffMatrix,
    x: &ReactiveStrategy,
    y: &MixedStrategy,
) -> Result<FieldValue> {
    typed_field(FieldKind::Replicator, game, x, y)
}

/// Gradient descent-ascent: the payoff gradients centered on the simplex
/// tangent space, `dx_{i|j} = g_ij - mean_i g_ij`, `dy_j = -(h_j - mean_j h_j)`.
/// Defined for interior states.
pub fn gda_field(game: &PayoffMatrix, x: &ReactiveStrategy, y: &MixedStrategy) -> Result<FieldValue> {
    typed_field(FieldKind::GradientDescentAscent, game, x, y)
}

/// Replicator dynamics of a memoryless pair applied column by column: every
/// column of X follows `dx_i = x_i((U y)_i - xᵀ U y)` and Y follows
/// `dy_j = -y_j((Uᵀ x_st)_j - x_stᵀ U y)`. A reactive strategy with identical
/// columns keeps them identical, which reproduces the classical game
/// without memory.
pub fn memoryless_field(
    game: &PayoffMatrix,
    x: &ReactiveStrategy,
    y: &MixedStrategy,
) -> Result<FieldValue> {
    typed_field(FieldKind::MemorylessReplicator, game, x, y)
}

/// Memoryless replicator field for a pair of mixed strategies.
pub fn memoryless_replicator(
    game: &PayoffMatrix,
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let reactive = ReactiveStrategy::memoryless(x, game.cols());
    let f = memoryless_field(game, &reactive, y)?;
    Ok((f.dx.column(0).into_owned(), f.dy))
}

pub fn field(
    kind: FieldKind,
    game: &PayoffMatrix,
    x: &ReactiveStrategy,
    y: &MixedStrategy,
) -> Result<FieldValue> {
    typed_field(kind, game, x, y)
}

/// Allocation-free evaluation of the fields on the flattened state
/// (X column-major, then y).
pub(crate) struct Kernel<'a> {
    kind: FieldKind,
    u: &'a [f64],
    m_x: usize,
    m_y: usize,
    uy: Vec<f64>,
    x_st: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(kind: FieldKind, game: &'a PayoffMatrix) -> Self {
        let (m_x, m_y) = (game.rows(), game.cols());
        Self {
            kind,
            u: game.entries().as_slice(),
            m_x,
            m_y,
            uy: vec![0.0; m_x],
            x_st: vec![0.0; m_x],
            c: vec![0.0; m_y],
            h: vec![0.0; m_y],
        }
    }

    #[inline]
    fn u(&self, i: usize, j: usize) -> f64 {
        self.u[i + j * self.m_x]
    }

    pub(crate) fn eval(&mut self, state: &[f64], out: &mut [f64]) {
        let (m_x, m_y) = (self.m_x, self.m_y);
        let (xs, y) = state.split_at(m_x * m_y);
        let (dxs, dy) = out.split_at_mut(m_x * m_y);

        for i in 0..m_x {
            let mut uy = 0.0;
            let mut st = 0.0;
            for j in 0..m_y {
                uy += self.u(i, j) * y[j];
                st += xs[i + j * m_x] * y[j];
            }
            self.uy[i] = uy;
            self.x_st[i] = st;
        }
        // c_j = Σ_i x_{i|j} (U y)_i, the X-average of (U y) under column j.
        for j in 0..m_y {
            let col = &xs[j * m_x..(j + 1) * m_x];
            self.c[j] = col.iter().zip(&self.uy).map(|(a, b)| a * b).sum();
        }
        // h_j = (Uᵀ x_st)_j, plus c_j for the reactive gradient.
        for j in 0..m_y {
            let mut k = 0.0;
            for i in 0..m_x {
                k += self.u(i, j) * self.x_st[i];
            }
            self.h[j] = match self.kind {
                FieldKind::MemorylessReplicator => k,
                _ => k + self.c[j],
            };
        }

        match self.kind {
            FieldKind::Replicator => {
                for j in 0..m_y {
                    for i in 0..m_x {
                        let k = i + j * m_x;
                        dxs[k] = xs[k] * y[j] * (self.uy[i] - self.c[j]);
                    }
                }
                let avg: f64 = y.iter().zip(&self.h).map(|(a, b)| a * b).sum();
                for j in 0..m_y {
                    dy[j] = -y[j] * (self.h[j] - avg);
                }
            }
            FieldKind::GradientDescentAscent => {
                let mean_uy = self.uy.iter().sum::<f64>() / m_x as f64;
                for j in 0..m_y {
                    for i in 0..m_x {
                        dxs[i + j * m_x] = y[j] * (self.uy[i] - mean_uy);
                    }
                }
                let mean_h = self.h.iter().sum::<f64>() / m_y as f64;
                for j in 0..m_y {
                    dy[j] = -(self.h[j] - mean_h);
                }
            }
            FieldKind::MemorylessReplicator => {
                for j in 0..m_y {
                    for i in 0..m_x {
                        let k = i + j * m_x;
                        dxs[k] = xs[k] * (self.uy[i] - self.c[j]);
                    }
                }
                let avg: f64 = y.iter().zip(&self.h).map(|(a, b)| a * b).sum();
                for j in 0..m_y {
                    dy[j] = -y[j] * (self.h[j] - avg);
                }
            }
        }
    }
}

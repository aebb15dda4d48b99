use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::game::{EquilibriumInfo, PayoffMatrix};
use crate::strategy::{MixedStrategy, ReactiveStrategy};

/// `KL(p* ‖ p) = Σ_{i: p*_i > 0} p*_i (log p*_i - log p_i)`.
///
/// Coordinates where `p*` vanishes contribute nothing; a zero in `p` where
/// `p*` is positive is reported as [`Error::InfiniteDivergence`].
pub fn kl_divergence(p_star: &[f64], p: &[f64]) -> Result<f64> {
    check_dim("kl divergence", p_star.len(), p.len())?;
    let mut total = 0.0;
    for (index, (&a, &b)) in p_star.iter().zip(p).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::InfiniteDivergence { index });
            }
            total += a * (a.ln() - b.ln());
        }
    }
    Ok(total)
}

/// `Σ_j KL(x* ‖ x_j) + KL(y* ‖ y)`: one KL term per conditional column of X.
pub fn conditional_sum_divergence(
    x: &ReactiveStrategy,
    y: &MixedStrategy,
    eq: &EquilibriumInfo,
) -> Result<f64> {
    check_dim("divergence (columns of X)", y.len(), x.cols())?;
    let x_star = eq.x_star.as_slice();
    let mut total = kl_divergence(eq.y_star.as_slice(), y.as_slice())?;
    for col in x.probs().column_iter() {
        total += kl_divergence(x_star, col.as_slice())?;
    }
    Ok(total)
}

/// `KL(x* ‖ x) + KL(y* ‖ y)` for a memoryless pair.
pub fn classical_divergence(x: &MixedStrategy, y: &MixedStrategy, eq: &EquilibriumInfo) -> Result<f64> {
    Ok(kl_divergence(eq.x_star.as_slice(), x.as_slice())?
        + kl_divergence(eq.y_star.as_slice(), y.as_slice())?)
}

/// Squared-norm divergence used with gradient descent-ascent:
/// `Σ_j ½‖x_j - x*‖² + ½‖y - y*‖²`.
pub fn gda_divergence(x: &ReactiveStrategy, y: &MixedStrategy, eq: &EquilibriumInfo) -> Result<f64> {
    check_dim("divergence (columns of X)", y.len(), x.cols())?;
    check_dim("divergence (rows of X)", eq.x_star.len(), x.rows())?;
    let mut total = 0.5 * (y.probs() - eq.y_star.probs()).norm_squared();
    for col in x.probs().column_iter() {
        total += 0.5 * (col - eq.x_star.probs()).norm_squared();
    }
    Ok(total)
}

/// Rate of change of the conditional-sum divergence along the learning
/// dynamics, `-dyᵀ Xᵀ U dy` with `dy = y - y*`.
pub fn divergence_rate(
    game: &PayoffMatrix,
    x: &ReactiveStrategy,
    y: &MixedStrategy,
    eq: &EquilibriumInfo,
) -> Result<f64> {
    check_dim("divergence rate (rows of X)", game.rows(), x.rows())?;
    check_dim("divergence rate (columns of X)", game.cols(), x.cols())?;
    check_dim("divergence rate (y)", game.cols(), y.len())?;
    check_dim("divergence rate (y*)", game.cols(), eq.y_star.len())?;
    let dy: DVector<f64> = y.probs() - eq.y_star.probs();
    let x_dy = x.probs() * &dy;
    let u_dy = game.entries() * &dy;
    Ok(-x_dy.dot(&u_dy))
}

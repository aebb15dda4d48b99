//! Definiteness of a square matrix restricted to zero-sum vectors.
//!
//! Substituting `δ_k̂ = -Σ_{k≠k̂} δ̃_k` turns the quadratic form over zero-sum
//! `δ` into an unconstrained form over `δ̃` with the reduced matrix
//! `m̃_kk' = m_kk' - m_kk̂ - m_k̂k' + m_k̂k̂`, so `δᵀ M δ = δ̃ᵀ M̃ δ̃`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default eigenvalue threshold, relative to the spectral radius of the
/// symmetric part of the input matrix.
pub const DEFAULT_DEFINITENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Semidefinite,
}

impl Definiteness {
    /// Integer code used in CSV output.
    pub fn code(self) -> i8 {
        match self {
            Definiteness::PositiveDefinite => 1,
            Definiteness::NegativeDefinite => -1,
            Definiteness::Indefinite => 2,
            Definiteness::Semidefinite => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefinitenessVerdict {
    pub verdict: Definiteness,
    /// `M̃`, of size `(n-1)×(n-1)`.
    pub reduced: DMatrix<f64>,
    /// Zero-based index `k̂` eliminated by the reduction.
    pub pivot_index: usize,
}

/// The `(n-1)×(n-1)` matrix `M̃` over indices other than `k_hat`.
pub fn reduce_for_zero_sum(m: &DMatrix<f64>, k_hat: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "zero-sum reduction needs a square matrix",
            expected: n,
            got: m.ncols(),
        });
    }
    if n < 2 || k_hat >= n {
        return Err(Error::InvalidIndex { index: k_hat, dim: n });
    }
    let keep: Vec<usize> = (0..n).filter(|&k| k != k_hat).collect();
    Ok(DMatrix::from_fn(n - 1, n - 1, |a, b| {
        let (k, kp) = (keep[a], keep[b]);
        m[(k, kp)] - m[(k, k_hat)] - m[(k_hat, kp)] + m[(k_hat, k_hat)]
    }))
}

/// Classifies `M` on zero-sum vectors, eliminating the last index.
pub fn zero_sum_definiteness(m: &DMatrix<f64>, tol: f64) -> Result<DefinitenessVerdict> {
    let n = m.nrows();
    zero_sum_definiteness_at(m, n.saturating_sub(1), tol)
}

/// Classifies `M` on zero-sum vectors by the eigenvalue signs of the
/// symmetric part of `M̃`; eigenvalues within `tol · ρ` of zero count as
/// zero, where `ρ` is the spectral radius of `(M + Mᵀ)/2`.
pub fn zero_sum_definiteness_at(
    m: &DMatrix<f64>,
    k_hat: usize,
    tol: f64,
) -> Result<DefinitenessVerdict> {
    let reduced = reduce_for_zero_sum(m, k_hat)?;
    let sym_full = (m + m.transpose()) * 0.5;
    let radius = sym_full
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |r, v| r.max(v.abs()));
    let threshold = tol * radius;

    let sym = (&reduced + reduced.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let pos = eig.iter().filter(|&&v| v > threshold).count();
    let neg = eig.iter().filter(|&&v| v < -threshold).count();
    let dim = eig.len();
    let verdict = if radius == 0.0 {
        Definiteness::Semidefinite
    } else if pos == dim {
        Definiteness::PositiveDefinite
    } else if neg == dim {
        Definiteness::NegativeDefinite
    } else if pos > 0 && neg > 0 {
        Definiteness::Indefinite
    } else {
        Definiteness::Semidefinite
    };
    Ok(DefinitenessVerdict {
        verdict,
        reduced,
        pivot_index: k_hat,
    })
}

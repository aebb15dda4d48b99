use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::lp::solve_maximin;
use super::PayoffMatrix;
use crate::error::{check_dim, Error, Result};
use crate::strategy::MixedStrategy;

/// Default threshold for support detection and the null-space rank cut.
pub const DEFAULT_NASH_TOL: f64 = 1e-9;

/// A Nash equilibrium together with the structure of the equilibrium set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumInfo {
    pub x_star: MixedStrategy,
    pub y_star: MixedStrategy,
    /// Game value `u*`.
    pub value: f64,
    pub support_x: Vec<usize>,
    pub support_y: Vec<usize>,
    /// The columns `u_{·j}` are linearly dependent.
    pub degenerate: bool,
    /// Basis of `{a : Σ_j a_j u_{·j} = 0}`.
    pub null_space_coeffs: Vec<Vec<f64>>,
}

impl EquilibriumInfo {
    /// Builds an info record for a known equilibrium without running the LP.
    pub fn from_strategies(
        game: &PayoffMatrix,
        x_star: MixedStrategy,
        y_star: MixedStrategy,
        tol: f64,
    ) -> Result<Self> {
        let check = verify_equilibrium(game, &x_star, &y_star, tol)?;
        if !check.is_equilibrium {
            return Err(Error::NotOnSimplex(
                "strategies do not form a Nash equilibrium".into(),
            ));
        }
        let null_space_coeffs: Vec<Vec<f64>> = null_space(game.entries(), tol)
            .into_iter()
            .map(|v| v.as_slice().to_vec())
            .collect();
        Ok(Self {
            support_x: support(x_star.as_slice(), tol),
            support_y: support(y_star.as_slice(), tol),
            x_star,
            y_star,
            value: check.value,
            degenerate: !null_space_coeffs.is_empty(),
            null_space_coeffs,
        })
    }

    /// Every equilibrium probability is strictly positive.
    pub fn is_full_support(&self) -> bool {
        self.support_x.len() == self.x_star.len() && self.support_y.len() == self.y_star.len()
    }
}

/// Outcome of checking the support-wise Nash conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCheck {
    pub is_equilibrium: bool,
    /// `xᵀ U y`; equals the game value when `is_equilibrium`.
    pub value: f64,
}

/// The two-basis equilibrium segment of a degenerate game:
/// `x*(r) = r·base_x + (1-r)·alt_x`, likewise for Y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSegmentParam {
    pub base_x: Vec<f64>,
    pub alt_x: Vec<f64>,
    pub base_y: Vec<f64>,
    pub alt_y: Vec<f64>,
    /// Parameters locating the solved equilibrium on each segment.
    pub r_x: f64,
    pub r_y: f64,
}

impl EquilibriumSegmentParam {
    pub fn x_at(&self, r: f64) -> Vec<f64> {
        lerp(&self.base_x, &self.alt_x, r)
    }

    pub fn y_at(&self, r: f64) -> Vec<f64> {
        lerp(&self.base_y, &self.alt_y, r)
    }
}

fn lerp(base: &[f64], alt: &[f64], r: f64) -> Vec<f64> {
    base.iter().zip(alt).map(|(b, a)| r * b + (1.0 - r) * a).collect()
}

fn support(p: &[f64], tol: f64) -> Vec<usize> {
    p.iter()
        .enumerate()
        .filter(|(_, &v)| v > tol)
        .map(|(k, _)| k)
        .collect()
}

/// Zeroes entries below `tol` and renormalizes.
fn clean_probabilities(p: &[f64], tol: f64) -> Vec<f64> {
    let cleaned: Vec<f64> = p.iter().map(|&v| if v > tol { v } else { 0.0 }).collect();
    let s: f64 = cleaned.iter().sum();
    cleaned.into_iter().map(|v| v / s).collect()
}

/// Orthonormal basis of `{a : M a = 0}`, using singular values below
/// `rel_tol · σ_max` as the rank cut.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    // Pad wide matrices with zero rows so the SVD yields a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.max();
    let cut = rel_tol * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max == 0.0 || s <= cut)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect()
}

/// Solves the zero-sum game by linear programming and attaches the
/// degeneracy data of the payoff columns.
pub fn solve_nash(game: &PayoffMatrix, tol: f64) -> Result<EquilibriumInfo> {
    let sol = solve_maximin(game.entries())?;
    let x = clean_probabilities(&sol.row_strategy, tol);
    let y = clean_probabilities(&sol.col_strategy, tol);
    let x_star = MixedStrategy::new(x).map_err(|e| Error::Solver(e.to_string()))?;
    let y_star = MixedStrategy::new(y).map_err(|e| Error::Solver(e.to_string()))?;

    let scale = game.entries().amax().max(1.0);
    let check = verify_equilibrium(game, &x_star, &y_star, 1e3 * f64::EPSILON * scale + tol)?;
    if !check.is_equilibrium || (check.value - sol.value).abs() > 1e-6 * scale {
        return Err(Error::Solver(format!(
            "LP optimum {:?}/{:?} (value {}) fails the equilibrium check",
            x_star.as_slice(),
            y_star.as_slice(),
            sol.value
        )));
    }

    let null_space_coeffs: Vec<Vec<f64>> = null_space(game.entries(), tol)
        .into_iter()
        .map(|v| v.as_slice().to_vec())
        .collect();
    Ok(EquilibriumInfo {
        support_x: support(x_star.as_slice(), tol),
        support_y: support(y_star.as_slice(), tol),
        x_star,
        y_star,
        value: check.value,
        degenerate: !null_space_coeffs.is_empty(),
        null_space_coeffs,
    })
}

/// Checks the support-wise Nash conditions: on Y's support every column
/// payoff `Σ_i u_ij x_i` equals the value, off it the column payoff is at
/// least the value; on X's support every row payoff `Σ_j u_ij y_j` equals the
/// value, off it the row payoff is at most the value.
pub fn verify_equilibrium(
    game: &PayoffMatrix,
    x: &MixedStrategy,
    y: &MixedStrategy,
    tol: f64,
) -> Result<EquilibriumCheck> {
    check_dim("equilibrium check (x)", game.rows(), x.len())?;
    check_dim("equilibrium check (y)", game.cols(), y.len())?;
    let u = game.entries();
    let col_payoffs = u.transpose() * x.probs();
    let row_payoffs = u * y.probs();
    let value = x.probs().dot(&row_payoffs);

    let cols_ok = y.as_slice().iter().zip(col_payoffs.iter()).all(|(&yj, &c)| {
        if yj > tol {
            (c - value).abs() <= tol
        } else {
            c >= value - tol
        }
    });
    let rows_ok = x.as_slice().iter().zip(row_payoffs.iter()).all(|(&xi, &r)| {
        if xi > tol {
            (r - value).abs() <= tol
        } else {
            r <= value + tol
        }
    });
    Ok(EquilibriumCheck {
        is_equilibrium: cols_ok && rows_ok,
        value,
    })
}

/// Extends `point` along `dir` in both directions until it leaves the simplex.
fn segment_ends(point: &[f64], dir: &DVector<f64>, tol: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t_hi = f64::INFINITY;
    let mut t_lo = f64::NEG_INFINITY;
    for (&p, &d) in point.iter().zip(dir.iter()) {
        if d < -tol {
            t_hi = t_hi.min(p / -d);
            t_lo = t_lo.max(-(1.0 - p) / -d);
        } else if d > tol {
            t_hi = t_hi.min((1.0 - p) / d);
            t_lo = t_lo.max(-p / d);
        }
    }
    let at = |t: f64| -> Vec<f64> {
        let raw: Vec<f64> = point.iter().zip(dir.iter()).map(|(p, d)| p + t * d).collect();
        clean_probabilities(&raw, tol)
    };
    let (a, b) = (at(t_lo), at(t_hi));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Position of `p` on `r·base + (1-r)·alt`, clamped to `[0, 1]`.
fn segment_param(p: &[f64], base: &[f64], alt: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&p, &b), &a) in p.iter().zip(base).zip(alt) {
        num += (p - a) * (b - a);
        den += (b - a) * (b - a);
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Directions `d` with `Σ_k d_k = 0` and `m d = 0`: moving an equilibrium
/// strategy along them keeps every opponent payoff unchanged.
fn zero_sum_null_directions(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    let mut aug = DMatrix::zeros(rows + 1, cols);
    aug.view_mut((0, 0), (rows, cols)).copy_from(m);
    let scale = m.amax().max(1.0);
    aug.row_mut(rows).fill(scale);
    null_space(&aug, tol)
}

/// Parameterizes the segment of equilibria of a degenerate game, when both
/// players have a simplex-tangent direction that leaves all payoffs of the
/// opponent unchanged. Returns `None` otherwise.
pub fn equilibrium_segment(
    game: &PayoffMatrix,
    info: &EquilibriumInfo,
) -> Option<EquilibriumSegmentParam> {
    if !info.degenerate {
        return None;
    }
    let tol = DEFAULT_NASH_TOL;
    let dir_x = zero_sum_null_directions(&game.entries().transpose(), tol)
        .into_iter()
        .next()?;
    let dir_y = zero_sum_null_directions(game.entries(), tol)
        .into_iter()
        .next()?;
    let (base_x, alt_x) = segment_ends(info.x_star.as_slice(), &dir_x, tol);
    let (base_y, alt_y) = segment_ends(info.y_star.as_slice(), &dir_y, tol);
    let r_x = segment_param(info.x_star.as_slice(), &base_x, &alt_x);
    let r_y = segment_param(info.y_star.as_slice(), &base_y, &alt_y);
    Some(EquilibriumSegmentParam {
        base_x,
        alt_x,
        base_y,
        alt_y,
        r_x,
        r_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_coupled_matching_pennies, make_matching_pennies, CoupledVariant};

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    /// Distance from `v` to the span of `basis` (orthonormal).
    fn residual_from_span(v: &[f64], basis: &[Vec<f64>]) -> f64 {
        let mut r = DVector::from_column_slice(v);
        for b in basis {
            let b = DVector::from_column_slice(b);
            let c = r.dot(&b);
            r -= b * c;
        }
        r.norm()
    }

    #[test]
    fn matching_pennies_equilibrium() {
        let info = solve_nash(&make_matching_pennies(), DEFAULT_NASH_TOL).unwrap();
        assert_vec_close(info.x_star.as_slice(), &[0.5, 0.5], 1e-12);
        assert_vec_close(info.y_star.as_slice(), &[0.5, 0.5], 1e-12);
        assert!(info.value.abs() < 1e-12);
        assert!(info.is_full_support());
        // u_1 + u_2 = 0, but the dependency is not a zero-sum direction, so
        // the equilibrium stays unique.
        assert!(info.degenerate);
        assert_eq!(info.null_space_coeffs.len(), 1);
        assert!(residual_from_span(&[1.0, 1.0], &info.null_space_coeffs) < 1e-12);
    }

    #[test]
    fn boundary_variant_equilibrium() {
        let g = make_coupled_matching_pennies(CoupledVariant::Boundary, 0);
        let info = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        assert_vec_close(info.x_star.as_slice(), &[0.0, 0.5, 0.0, 0.5], 1e-12);
        assert_eq!(info.support_x, vec![1, 3]);
        assert!(info.value.abs() < 1e-12);
        // X's optimum is unique; Y's optimal set {y : U y <= 0} is the
        // triangle spanned by (1/2,0,1/2,0), (0,1/2,0,1/2), (2/5,1/5,2/5,0).
        let uy = g.entries() * info.y_star.probs();
        assert!(uy.max() <= 1e-12);
        let vertex_y = MixedStrategy::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let check = verify_equilibrium(&g, &info.x_star, &vertex_y, DEFAULT_NASH_TOL).unwrap();
        assert!(check.is_equilibrium);
        assert!(info.degenerate);
        assert_eq!(info.null_space_coeffs.len(), 1);
        assert!(residual_from_span(&[0.0, 1.0, 0.0, 1.0], &info.null_space_coeffs) < 1e-12);
    }

    #[test]
    fn continuous_variant_null_space_and_uniform_point() {
        let g = make_coupled_matching_pennies(CoupledVariant::Continuous, 0);
        let info = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        assert!(info.degenerate);
        assert_eq!(info.null_space_coeffs.len(), 2);
        for a in [[0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 0.0]] {
            assert!(residual_from_span(&a, &info.null_space_coeffs) < 1e-12);
        }
        for a in &info.null_space_coeffs {
            let ua = g.entries() * DVector::from_column_slice(a);
            assert!(ua.amax() <= 1e-12);
        }
        let uniform = MixedStrategy::uniform(4);
        let check = verify_equilibrium(&g, &uniform, &uniform, DEFAULT_NASH_TOL).unwrap();
        assert!(check.is_equilibrium);
        assert!(check.value.abs() < 1e-15);
    }

    #[test]
    fn verify_examples() {
        let mp = make_matching_pennies();
        let half = MixedStrategy::uniform(2);
        let c = verify_equilibrium(&mp, &half, &half, 1e-9).unwrap();
        assert!(c.is_equilibrium);
        assert_eq!(c.value, 0.0);

        let off = MixedStrategy::new(vec![0.6, 0.4]).unwrap();
        assert!(!verify_equilibrium(&mp, &off, &half, 1e-9).unwrap().is_equilibrium);

        let g = make_coupled_matching_pennies(CoupledVariant::Boundary, 0);
        let x = MixedStrategy::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let y = MixedStrategy::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        assert!(verify_equilibrium(&g, &x, &y, 1e-9).unwrap().is_equilibrium);

        assert!(matches!(
            verify_equilibrium(&g, &half, &y, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn segment_of_continuous_variant() {
        let g = make_coupled_matching_pennies(CoupledVariant::Continuous, 0);
        let info = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        let seg = equilibrium_segment(&g, &info).expect("segment exists");
        assert_vec_close(&seg.base_x, &[0.0, 0.5, 0.0, 0.5], 1e-12);
        assert_vec_close(&seg.alt_x, &[0.5, 0.0, 0.5, 0.0], 1e-12);
        assert_vec_close(&seg.base_y, &[0.0, 0.5, 0.0, 0.5], 1e-12);
        assert_vec_close(&seg.alt_y, &[0.5, 0.0, 0.5, 0.0], 1e-12);
        assert_vec_close(&seg.x_at(seg.r_x), info.x_star.as_slice(), 1e-12);
        assert_vec_close(&seg.y_at(seg.r_y), info.y_star.as_slice(), 1e-12);
        for r in [0.0, 0.3, 1.0] {
            let x = MixedStrategy::new(seg.x_at(r)).unwrap();
            let y = MixedStrategy::new(seg.y_at(1.0 - r)).unwrap();
            assert!(verify_equilibrium(&g, &x, &y, 1e-9).unwrap().is_equilibrium);
        }
    }

    #[test]
    fn no_segment_for_unique_equilibria() {
        let mp = make_matching_pennies();
        let info = solve_nash(&mp, DEFAULT_NASH_TOL).unwrap();
        assert!(equilibrium_segment(&mp, &info).is_none());

        let g = make_coupled_matching_pennies(CoupledVariant::Boundary, 0);
        let info = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        assert!(equilibrium_segment(&g, &info).is_none());
    }

    #[test]
    fn non_square_game() {
        // Row 2 is dominated; the game reduces to matching pennies on rows 1, 3.
        let g = PayoffMatrix::from_rows(&[vec![1.0, -1.0], vec![-2.0, -2.0], vec![-1.0, 1.0]])
            .unwrap();
        let info = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        assert_vec_close(info.x_star.as_slice(), &[0.5, 0.0, 0.5], 1e-12);
        assert_vec_close(info.y_star.as_slice(), &[0.5, 0.5], 1e-12);
        assert!(!info.degenerate);

        let wide = PayoffMatrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0]]).unwrap();
        let info = solve_nash(&wide, DEFAULT_NASH_TOL).unwrap();
        assert!(info.degenerate);
        assert_eq!(info.null_space_coeffs.len(), 2);
    }
}

//! Convergence detection on finished trajectories.

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::game::{EquilibriumInfo, EquilibriumSegmentParam};

const GRID_POINTS: usize = 201;
const REFINE_ITERS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub converged_y: bool,
    pub converged_x_st: bool,
    /// `‖y(T) - y*‖∞`.
    pub final_dist_y: f64,
    /// `‖x^st(T) - x*‖∞`.
    pub final_dist_x_st: f64,
    /// Distance from `y(T)` to the equilibrium segment, or `final_dist_y`
    /// when the game has no segment.
    pub dist_to_eq_set: f64,
    /// Segment parameter of the closest equilibrium.
    pub limit_r: Option<f64>,
    /// Largest per-coordinate range of `y` over the trailing window.
    pub osc_amplitude_y: f64,
    pub osc_amplitude_x_st: f64,
    /// First sample time after which the distance of `y` to the equilibrium
    /// (set) stays below `tol`.
    pub time_to_tol: Option<f64>,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// `min_r ‖y - y*(r)‖∞` over `r ∈ [0, 1]`. The objective is convex in `r`,
/// so a grid search followed by ternary refinement is exact up to rounding.
fn dist_to_segment(y: &[f64], seg: &EquilibriumSegmentParam) -> (f64, f64) {
    let f = |r: f64| sup_dist(y, &seg.y_at(r));
    let step = 1.0 / (GRID_POINTS - 1) as f64;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..GRID_POINTS {
        let d = f(k as f64 * step);
        if d < best {
            best = d;
            best_k = k;
        }
    }
    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_k + 1) as f64 * step).min(1.0);
    for _ in 0..REFINE_ITERS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let r = 0.5 * (lo + hi);
    let d = f(r);
    if d <= best {
        (d, r)
    } else {
        (best, best_k as f64 * step)
    }
}

fn amplitude<'a>(rows: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for row in rows {
        if lo.is_empty() {
            lo = row.to_vec();
            hi = row.to_vec();
            continue;
        }
        for (k, &v) in row.iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    lo.iter().zip(&hi).fold(0.0, |m, (a, b)| m.max(b - a))
}

/// Summarizes where a trajectory ended up relative to `eq` (and the
/// equilibrium segment, when one exists).
pub fn detect_convergence(
    traj: &Trajectory,
    eq: &EquilibriumInfo,
    segment: Option<&EquilibriumSegmentParam>,
    tol: f64,
    window_frac: f64,
) -> ConvergenceReport {
    let samples = &traj.samples;
    let x_st: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| (s.state.x.probs() * s.state.y.probs()).as_slice().to_vec())
        .collect();
    let y_star = eq.y_star.as_slice();
    let dist_y = |y: &[f64]| match segment {
        Some(seg) => dist_to_segment(y, seg).0,
        None => sup_dist(y, y_star),
    };

    let last = traj.last();
    let final_dist_y = sup_dist(last.state.y.as_slice(), y_star);
    let final_dist_x_st = sup_dist(x_st.last().expect("nonempty"), eq.x_star.as_slice());
    let (dist_to_eq_set, limit_r) = match segment {
        Some(seg) => {
            let (d, r) = dist_to_segment(last.state.y.as_slice(), seg);
            (d, Some(r))
        }
        None => (final_dist_y, None),
    };

    let window = ((samples.len() as f64 * window_frac).ceil() as usize).clamp(1, samples.len());
    let start = samples.len() - window;
    let osc_amplitude_y = amplitude(samples[start..].iter().map(|s| s.state.y.as_slice()));
    let osc_amplitude_x_st = amplitude(x_st[start..].iter().map(Vec::as_slice));

    let time_to_tol = match samples.iter().rposition(|s| dist_y(s.state.y.as_slice()) >= tol) {
        None => Some(samples[0].t),
        Some(k) if k + 1 < samples.len() => Some(samples[k + 1].t),
        Some(_) => None,
    };

    ConvergenceReport {
        converged_y: dist_to_eq_set < tol && osc_amplitude_y < tol,
        converged_x_st: final_dist_x_st < tol && osc_amplitude_x_st < tol,
        final_dist_y,
        final_dist_x_st,
        dist_to_eq_set,
        limit_r,
        osc_amplitude_y,
        osc_amplitude_x_st,
        time_to_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, FieldKind, IntegratorConfig, TrajectorySample};
    use crate::game::{
        equilibrium_segment, make_coupled_matching_pennies, make_matching_pennies, solve_nash,
        CoupledVariant, DEFAULT_NASH_TOL,
    };
    use crate::strategy::{JointState, MixedStrategy, ReactiveStrategy};

    fn constant(state: JointState, n: usize) -> Trajectory {
        Trajectory {
            kind: FieldKind::Replicator,
            samples: (0..n)
                .map(|k| TrajectorySample {
                    step: k,
                    t: k as f64,
                    state: state.clone(),
                    clamped: false,
                })
                .collect(),
        }
    }

    #[test]
    fn constant_trajectory_at_equilibrium() {
        let mp = make_matching_pennies();
        let eq = solve_nash(&mp, DEFAULT_NASH_TOL).unwrap();
        let s = JointState::new(ReactiveStrategy::uniform(2, 2), MixedStrategy::uniform(2)).unwrap();
        let r = detect_convergence(&constant(s, 10), &eq, None, 1e-3, 0.1);
        assert!(r.converged_y && r.converged_x_st);
        assert_eq!(r.osc_amplitude_y, 0.0);
        assert!(r.final_dist_y < 1e-12);
        assert_eq!(r.time_to_tol, Some(0.0));
    }

    #[test]
    fn memoryless_cycle_does_not_converge() {
        let mp = make_matching_pennies();
        let eq = solve_nash(&mp, DEFAULT_NASH_TOL).unwrap();
        let x = MixedStrategy::new(vec![0.7, 0.3]).unwrap();
        let s = JointState::new(
            ReactiveStrategy::memoryless(&x, 2),
            MixedStrategy::new(vec![0.4, 0.6]).unwrap(),
        )
        .unwrap();
        let cfg = IntegratorConfig {
            horizon: 100.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&mp, FieldKind::MemorylessReplicator, &s, &cfg, &mut []).unwrap();
        let r = detect_convergence(&traj, &eq, None, 1e-3, 0.1);
        assert!(!r.converged_y);
        assert!(r.osc_amplitude_y > 0.1, "{}", r.osc_amplitude_y);
        assert_eq!(r.time_to_tol, None);
    }

    #[test]
    fn segment_distance_is_zero_on_the_segment() {
        let g = make_coupled_matching_pennies(CoupledVariant::Continuous, 0);
        let eq = solve_nash(&g, DEFAULT_NASH_TOL).unwrap();
        let seg = equilibrium_segment(&g, &eq).unwrap();
        let y = seg.y_at(0.3);
        let (d, r) = dist_to_segment(&y, &seg);
        assert!(d < 1e-12 && (r - 0.3).abs() < 1e-9);
        let (d, _) = dist_to_segment(&[0.25, 0.25, 0.4, 0.1], &seg);
        // Closest segment point (a, 1/2 - a, a, 1/2 - a) with a = 0.325.
        assert!((d - 0.075).abs() < 1e-9, "{d}");
    }
}

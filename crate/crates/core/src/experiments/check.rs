//! Self-contained invariant suite behind the `check` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sample_initial_states;
use crate::diagnostics::{
    classical_divergence, conditional_sum_divergence, divergence_rate, log_odds_q, lyapunov_h,
    lyapunov_rate, zero_sum_definiteness, zero_sum_definiteness_at, Definiteness, ZeroSumVector,
    DEFAULT_DEFINITENESS_TOL,
};
use crate::dynamics::{field, integrate, FieldKind, IntegratorConfig};
use crate::error::Result;
use crate::game::{
    make_coupled_matching_pennies, make_matching_pennies, solve_nash, verify_equilibrium,
    CoupledVariant, DEFAULT_NASH_TOL,
};
use crate::strategy::{stationary_strategy, JointState, MixedStrategy};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<std::result::Result<String, String>>;

const CHECKS: [(&str, CheckFn); 9] = [
    ("nash-matching-pennies", nash_matching_pennies),
    ("nash-coupled-games", nash_coupled_games),
    ("field-tangent-to-simplex", field_tangent),
    ("divergence-rate-identity", divergence_rate_identity),
    ("lyapunov-rate-nonnegative", lyapunov_rate_nonnegative),
    ("matching-pennies-closed-forms", closed_forms),
    ("definiteness-pivot-invariance", definiteness_pivot_invariance),
    ("memoryless-conservation", memoryless_conservation),
    ("matching-pennies-convergence", matching_pennies_convergence),
];

/// Runs every check; an internal error counts as a failure.
pub fn run_checks() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn verdict(ok: bool, detail: String) -> Result<std::result::Result<String, String>> {
    Ok(if ok { Ok(detail) } else { Err(detail) })
}

fn mp_states(n: usize, seed: u64) -> Vec<JointState> {
    sample_initial_states(2, 2, n, seed, 0.01, false)
}

fn nash_matching_pennies() -> Result<std::result::Result<String, String>> {
    let eq = solve_nash(&make_matching_pennies(), DEFAULT_NASH_TOL)?;
    let err = eq
        .x_star
        .as_slice()
        .iter()
        .chain(eq.y_star.as_slice())
        .fold(0.0f64, |m, v| m.max((v - 0.5).abs()))
        .max(eq.value.abs());
    verdict(err < 1e-12, format!("max deviation from (1/2, 1/2), value 0: {err:.1e}"))
}

fn nash_coupled_games() -> Result<std::result::Result<String, String>> {
    let mut worst = Vec::new();
    for variant in [CoupledVariant::Interior, CoupledVariant::Continuous, CoupledVariant::Boundary] {
        let g = make_coupled_matching_pennies(variant, 0);
        let eq = solve_nash(&g, DEFAULT_NASH_TOL)?;
        if !verify_equilibrium(&g, &eq.x_star, &eq.y_star, DEFAULT_NASH_TOL)?.is_equilibrium {
            worst.push(variant.to_string());
        }
    }
    verdict(worst.is_empty(), format!("unverified: {worst:?}"))
}

fn field_tangent() -> Result<std::result::Result<String, String>> {
    let g = make_coupled_matching_pennies(CoupledVariant::Interior, 0);
    let mut worst = 0.0f64;
    for s in sample_initial_states(4, 4, 50, 11, 0.0, false) {
        for kind in [FieldKind::Replicator, FieldKind::GradientDescentAscent] {
            let v = field(kind, &g, &s.x, &s.y)?;
            for col in v.dx.column_iter() {
                worst = worst.max(col.sum().abs());
            }
            worst = worst.max(v.dy.sum().abs());
        }
    }
    verdict(worst < 1e-12, format!("max |column sum| of the field: {worst:.1e}"))
}

/// Difference quotient of `D` over one RK4 step versus the trapezoidal mean
/// of the closed-form rate at both ends.
fn divergence_rate_identity() -> Result<std::result::Result<String, String>> {
    let g = make_matching_pennies();
    let eq = solve_nash(&g, DEFAULT_NASH_TOL)?;
    let h = 1e-4;
    let mut worst = 0.0f64;
    for s in mp_states(20, 12) {
        let d = |st: &JointState| conditional_sum_divergence(&st.x, &st.y, &eq);
        let step = |dt: f64| -> Result<JointState> {
            let cfg = IntegratorConfig {
                dt: h,
                horizon: dt,
                floor_eps: 0.0,
                renormalize: false,
                record_every: 1,
            };
            Ok(integrate(&g, FieldKind::Replicator, &s, &cfg, &mut [])?.last().state.clone())
        };
        let fwd = step(h)?;
        let fd = (d(&fwd)? - d(&s)?) / h;
        let rate = 0.5
            * (divergence_rate(&g, &s.x, &s.y, &eq)? + divergence_rate(&g, &fwd.x, &fwd.y, &eq)?);
        worst = worst.max((fd - rate).abs() / rate.abs().max(1e-8));
    }
    verdict(worst < 1e-3, format!("max relative error: {worst:.1e}"))
}

fn lyapunov_rate_nonnegative() -> Result<std::result::Result<String, String>> {
    let g = make_coupled_matching_pennies(CoupledVariant::Interior, 0);
    let eq = solve_nash(&g, DEFAULT_NASH_TOL)?;
    let mut min_rate = f64::INFINITY;
    for s in sample_initial_states(4, 4, 200, 13, 0.0, false) {
        for delta in ZeroSumVector::spanning_set(4) {
            min_rate = min_rate.min(lyapunov_rate(&g, &s.y, &delta, &eq)?);
        }
    }
    verdict(min_rate >= 0.0, format!("min rate: {min_rate:.1e}"))
}

fn closed_forms() -> Result<std::result::Result<String, String>> {
    let g = make_matching_pennies();
    let eq = solve_nash(&g, DEFAULT_NASH_TOL)?;
    let delta = ZeroSumVector::new(vec![0.5, -0.5])?;
    let mut worst = 0.0f64;
    for s in mp_states(200, 14) {
        let (q1, q2) = log_odds_q(&s.x)?;
        let (x1, x2) = (s.x.probs()[(0, 0)], s.x.probs()[(0, 1)]);
        let y = s.y.as_slice()[0];
        let h = lyapunov_h(&g, &s.x, &delta)?;
        let hr = lyapunov_rate(&g, &s.y, &delta, &eq)?;
        let dr = divergence_rate(&g, &s.x, &s.y, &eq)?;
        worst = worst
            .max((h - 2.0 * 0.25 * (q1 - q2)).abs())
            .max((hr - 16.0 * 0.25 * (y - 0.5).powi(2)).abs())
            .max((dr + 4.0 * (y - 0.5).powi(2) * (x1 - x2)).abs());
    }
    verdict(worst < 1e-12, format!("max closed-form residual: {worst:.1e}"))
}

fn definiteness_pivot_invariance() -> Result<std::result::Result<String, String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut mismatches = 0;
    for _ in 0..200 {
        let m = nalgebra::DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..=1.0));
        let base = zero_sum_definiteness(&m, DEFAULT_DEFINITENESS_TOL)?.verdict;
        for k in 0..4 {
            if zero_sum_definiteness_at(&m, k, DEFAULT_DEFINITENESS_TOL)?.verdict != base {
                mismatches += 1;
            }
        }
        if base == Definiteness::PositiveDefinite || base == Definiteness::NegativeDefinite {
            for _ in 0..20 {
                let mut d: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let mean = d.iter().sum::<f64>() / 4.0;
                d.iter_mut().for_each(|v| *v -= mean);
                let dv = nalgebra::DVector::from_vec(d);
                let q = dv.dot(&(&m * &dv));
                if (base == Definiteness::PositiveDefinite) != (q > 0.0) {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(mismatches == 0, format!("mismatches: {mismatches}"))
}

fn memoryless_conservation() -> Result<std::result::Result<String, String>> {
    let g = make_matching_pennies();
    let eq = solve_nash(&g, DEFAULT_NASH_TOL)?;
    let cfg = IntegratorConfig {
        horizon: 20.0,
        ..IntegratorConfig::default()
    };
    let mut worst = 0.0f64;
    for s in sample_initial_states(2, 2, 5, 16, 0.05, true) {
        let traj = integrate(&g, FieldKind::MemorylessReplicator, &s, &cfg, &mut [])?;
        let dc = |st: &JointState| -> Result<f64> {
            let x = MixedStrategy::new(stationary_strategy(&st.x, &st.y)?.as_slice().to_vec())?;
            classical_divergence(&x, &st.y, &eq)
        };
        worst = worst.max((dc(&traj.last().state)? - dc(&s)?).abs());
    }
    verdict(worst < 1e-5, format!("max drift of the classical divergence: {worst:.1e}"))
}

fn matching_pennies_convergence() -> Result<std::result::Result<String, String>> {
    let g = make_matching_pennies();
    let cfg = IntegratorConfig {
        horizon: 500.0,
        record_every: 50_000,
        ..IntegratorConfig::default()
    };
    let mut worst = 0.0f64;
    for s in mp_states(5, 17) {
        let traj = integrate(&g, FieldKind::Replicator, &s, &cfg, &mut [])?;
        let y = traj.last().state.y.as_slice()[0];
        worst = worst.max((y - 0.5).abs());
    }
    verdict(worst < 1e-3, format!("max final |y - 1/2|: {worst:.1e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

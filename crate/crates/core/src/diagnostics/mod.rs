//! Global diagnostics of the learning dynamics.
//!
//! Along the replicator flow the conditional-sum divergence `D` changes at
//! rate `-dyᵀ Xᵀ U dy` (negative whenever `XᵀU` is positive definite for
//! zero-sum vectors) and every member `H(X; δ)` of the Lyapunov family grows
//! at rate `(δᵀ U dy)² ≥ 0`. Gradient descent-ascent has the same rates for a
//! squared-norm divergence and a bilinear `H`.

mod definiteness;
mod divergence;
mod lyapunov;

use nalgebra::DVector;

use crate::dynamics::FieldKind;
use crate::error::Result;
use crate::game::{EquilibriumInfo, PayoffMatrix};
use crate::strategy::{stationary_strategy, JointState, MixedStrategy};

pub use definiteness::{
    reduce_for_zero_sum, zero_sum_definiteness, zero_sum_definiteness_at, Definiteness,
    DefinitenessVerdict, DEFAULT_DEFINITENESS_TOL,
};
pub use divergence::{
    classical_divergence, conditional_sum_divergence, divergence_rate, gda_divergence,
    kl_divergence,
};
pub use lyapunov::{
    exploitability, gda_lyapunov, log_odds_q, lyapunov_h, lyapunov_rate, ZeroSumVector,
};

/// A labelled member of the Lyapunov family.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub label: String,
    pub delta: ZeroSumVector,
}

impl Probe {
    /// Default family `e_k - e_{k+1}`, labelled `e1-e2`, `e2-e3`, ...
    pub fn spanning(n: usize) -> Vec<Probe> {
        ZeroSumVector::spanning_set(n)
            .into_iter()
            .enumerate()
            .map(|(k, delta)| Probe {
                label: format!("e{}-e{}", k + 1, k + 2),
                delta,
            })
            .collect()
    }

    /// `δ = x - x*` for a probe strategy of X.
    pub fn strategy(name: &str, x: &MixedStrategy, eq: &EquilibriumInfo) -> Result<Probe> {
        Ok(Probe {
            label: format!("x-{name}"),
            delta: ZeroSumVector::probe(x, &eq.x_star)?,
        })
    }
}

/// Diagnostics of one trajectory sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub x_st: DVector<f64>,
    pub u_st: f64,
    pub d: f64,
    pub d_rate: f64,
    /// `(label, H)` in probe order.
    pub h_values: Vec<(String, f64)>,
    pub h_rates: Vec<(String, f64)>,
    /// `|u_st - u*|²` at the stationary strategy.
    pub exploitability: f64,
    pub q: Option<(f64, f64)>,
    /// Definiteness of `XᵀU` on zero-sum vectors.
    pub definiteness: DefinitenessVerdict,
    pub clamped: bool,
}

/// Evaluates the diagnostics matching a field kind against a fixed
/// reference equilibrium.
#[derive(Debug, Clone)]
pub struct DiagnosticsEvaluator<'a> {
    pub game: &'a PayoffMatrix,
    pub eq: &'a EquilibriumInfo,
    pub kind: FieldKind,
    pub probes: Vec<Probe>,
}

impl<'a> DiagnosticsEvaluator<'a> {
    pub fn new(game: &'a PayoffMatrix, eq: &'a EquilibriumInfo, kind: FieldKind) -> Self {
        Self {
            game,
            eq,
            kind,
            probes: Probe::spanning(game.rows()),
        }
    }

    pub fn with_probes(mut self, probes: Vec<Probe>) -> Self {
        self.probes = probes;
        self
    }

    /// `D` for the field: conditional-sum KL for replicator dynamics, squared
    /// norm for gradient descent-ascent, and the classical KL divergence of
    /// `(x^st, y)` for the memoryless baseline.
    pub fn divergence(&self, state: &JointState) -> Result<f64> {
        match self.kind {
            FieldKind::Replicator => conditional_sum_divergence(&state.x, &state.y, self.eq),
            FieldKind::GradientDescentAscent => gda_divergence(&state.x, &state.y, self.eq),
            FieldKind::MemorylessReplicator => {
                let x_st = MixedStrategy::new(stationary_strategy(&state.x, &state.y)?.as_slice().to_vec())?;
                classical_divergence(&x_st, &state.y, self.eq)
            }
        }
    }

    pub fn lyapunov(&self, state: &JointState, delta: &ZeroSumVector) -> Result<f64> {
        match self.kind {
            FieldKind::GradientDescentAscent => gda_lyapunov(self.game, &state.x, delta),
            _ => lyapunov_h(self.game, &state.x, delta),
        }
    }

    pub fn evaluate(&self, t: f64, state: &JointState, clamped: bool) -> Result<DiagnosticsSample> {
        let x_st = stationary_strategy(&state.x, &state.y)?;
        let u_st = x_st.dot(&(self.game.entries() * state.y.probs()));
        let mut h_values = Vec::with_capacity(self.probes.len());
        let mut h_rates = Vec::with_capacity(self.probes.len());
        for p in &self.probes {
            h_values.push((p.label.clone(), self.lyapunov(state, &p.delta)?));
            h_rates.push((p.label.clone(), lyapunov_rate(self.game, &state.y, &p.delta, self.eq)?));
        }
        let q = if self.game.rows() == 2 && self.game.cols() == 2 {
            log_odds_q(&state.x).ok()
        } else {
            None
        };
        let xt_u = state.x.probs().transpose() * self.game.entries();
        Ok(DiagnosticsSample {
            t,
            u_st,
            d: self.divergence(state)?,
            d_rate: divergence_rate(self.game, &state.x, &state.y, self.eq)?,
            h_values,
            h_rates,
            exploitability: (u_st - self.eq.value).powi(2),
            q,
            definiteness: zero_sum_definiteness(&xt_u, DEFAULT_DEFINITENESS_TOL)?,
            clamped,
            x_st,
        })
    }
}

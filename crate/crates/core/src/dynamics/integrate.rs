//! Fixed-step RK4 integration with a probability floor.

use super::field::Kernel;
use super::{FieldKind, IntegratorConfig};
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;
use crate::strategy::JointState;

/// Receives every post-step state (after clamping and renormalization),
/// including the initial one at step 0.
pub trait Observer {
    fn observe(&mut self, step: usize, t: f64, state: &JointState, clamped: bool);
}

impl<F: FnMut(usize, f64, &JointState, bool)> Observer for F {
    fn observe(&mut self, step: usize, t: f64, state: &JointState, clamped: bool) {
        self(step, t, state, clamped)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub step: usize,
    pub t: f64,
    pub state: JointState,
    /// The probability floor fired on the step that produced this sample.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: FieldKind,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Clamps every probability to at least `floor` and optionally renormalizes
/// each simplex block. Renormalization rescales only the mass above the
/// floor, so the bound survives it. Returns whether the floor fired.
fn project(state: &mut [f64], m_x: usize, m_y: usize, floor: f64, renormalize: bool) -> bool {
    let mut clamped = false;
    for v in state.iter_mut() {
        if *v < floor {
            *v = floor;
            clamped = true;
        }
    }
    if renormalize {
        let (xs, y) = state.split_at_mut(m_x * m_y);
        for block in xs.chunks_mut(m_x).chain(std::iter::once(y)) {
            let base = floor * block.len() as f64;
            let excess: f64 = block.iter().map(|v| v - floor).sum();
            if excess > 0.0 {
                let scale = (1.0 - base) / excess;
                block.iter_mut().for_each(|v| *v = floor + (*v - floor) * scale);
            }
        }
    }
    clamped
}

/// Integrates `kind` from `state0` over `[0, cfg.horizon]`.
///
/// Observers see every step; the returned trajectory keeps every
/// `cfg.record_every`-th step plus the final one.
pub fn integrate(
    game: &PayoffMatrix,
    kind: FieldKind,
    state0: &JointState,
    cfg: &IntegratorConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    state0.check_game(game)?;
    let (m_x, m_y) = (game.rows(), game.cols());
    cfg.validate(m_x, m_y)?;

    let n = state0.flat_len();
    let mut kernel = Kernel::new(kind, game);
    let mut state = state0.to_flat();
    let initial_clamp = project(&mut state, m_x, m_y, cfg.floor_eps, cfg.renormalize);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    let n_steps = cfg.n_steps();
    let stride = cfg.record_every.max(1);
    let mut samples = Vec::with_capacity(n_steps / stride + 2);
    let mut emit = |step: usize, t: f64, flat: &[f64], clamped: bool, samples: &mut Vec<TrajectorySample>| {
        let record = step % stride == 0 || step == n_steps;
        if !record && observers.is_empty() {
            return;
        }
        let js = JointState::from_flat_unchecked(m_x, m_y, flat);
        for obs in observers.iter_mut() {
            obs.observe(step, t, &js, clamped);
        }
        if record {
            samples.push(TrajectorySample {
                step,
                t,
                state: js,
                clamped,
            });
        }
    };
    emit(0, 0.0, &state, initial_clamp, &mut samples);

    let mut t = 0.0;
    for step in 1..=n_steps {
        let h = if step == n_steps {
            cfg.horizon - cfg.dt * (n_steps - 1) as f64
        } else {
            cfg.dt
        };
        kernel.eval(&state, &mut k1);
        for k in 0..n {
            tmp[k] = state[k] + 0.5 * h * k1[k];
        }
        kernel.eval(&tmp, &mut k2);
        for k in 0..n {
            tmp[k] = state[k] + 0.5 * h * k2[k];
        }
        kernel.eval(&tmp, &mut k3);
        for k in 0..n {
            tmp[k] = state[k] + h * k3[k];
        }
        kernel.eval(&tmp, &mut k4);
        for k in 0..n {
            tmp[k] = state[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        t = if step == n_steps {
            cfg.horizon
        } else {
            step as f64 * cfg.dt
        };
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                last_state: state,
            });
        }
        std::mem::swap(&mut state, &mut tmp);
        let clamped = project(&mut state, m_x, m_y, cfg.floor_eps, cfg.renormalize);
        emit(step, t, &state, clamped, &mut samples);
    }
    debug_assert!((t - cfg.horizon).abs() < 1e-9 || n_steps == 0);

    Ok(Trajectory { kind, samples })
}

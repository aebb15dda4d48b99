//! Continuous-time learning in two-player zero-sum games where one player
//! (X) uses a reactive strategy conditioned on the opponent's previous action
//! and the other (Y) is memoryless.
//!
//! - [`game`]: payoff matrices, benchmark games and Nash equilibria.
//! - [`strategy`]: reactive and mixed strategies, stationary payoffs.
//! - [`dynamics`]: replicator and gradient descent-ascent fields, RK4.
//! - [`diagnostics`]: conditional-sum divergence, the Lyapunov family,
//!   exploitability and definiteness for zero-sum vectors.
//! - [`experiments`]: configured runs, convergence detection, CSV output.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod game;
pub mod strategy;

pub use error::{Error, Result};

use thiserror::Error;

/// Errors produced by the game, strategy, dynamics and diagnostics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid payoff matrix: {0}")]
    InvalidPayoff(String),

    #[error("not a probability vector: {0}")]
    NotOnSimplex(String),

    /// A reference probability is positive where the compared distribution
    /// (or the log-strategy) is exactly zero. Distinct from a numeric failure.
    #[error("infinite divergence: component {index} is zero")]
    InfiniteDivergence { index: usize },

    /// `log X` is undefined because an entry of the reactive strategy is zero.
    #[error("log of zero probability at X[{row}, {col}]")]
    LogOfZero { row: usize, col: usize },

    #[error("index {index} out of range for dimension {dim}")]
    InvalidIndex { index: usize, dim: usize },

    #[error("not a zero-sum vector: {0}")]
    NotZeroSum(String),

    #[error("operation requires a two-action reactive player, got {0} actions")]
    NotTwoAction(usize),

    #[error("non-finite state at t = {t}; last finite state: {last_state:?}")]
    NonFinite { t: f64, last_state: Vec<f64> },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidExperiment(String),

    #[error("i/o failure: {0}")]
    Io(String),

    /// The zero-sum LP always has a solution for finite payoffs, so this only
    /// ever signals a bug in the solver.
    #[error("internal LP solver failure: {0}")]
    Solver(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

//! Learning vector fields and their time integration.

mod field;
mod integrate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::{
    field, gda_field, grad_x, grad_y, memoryless_field, memoryless_replicator, replicator_field,
    FieldValue,
};
pub use integrate::{integrate, Observer, Trajectory, TrajectorySample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum FieldKind {
    #[default]
    #[serde(rename = "replicator")]
    Replicator,
    #[serde(rename = "gda")]
    GradientDescentAscent,
    /// Classical replicator dynamics without memory, the cycling baseline.
    #[serde(rename = "memoryless")]
    MemorylessReplicator,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Replicator => "replicator",
            FieldKind::GradientDescentAscent => "gda",
            FieldKind::MemorylessReplicator => "memoryless",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicator" => Ok(Self::Replicator),
            "gda" => Ok(Self::GradientDescentAscent),
            "memoryless" => Ok(Self::MemorylessReplicator),
            other => Err(Error::InvalidConfig(format!("unknown field {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Lower bound applied to every probability after each step.
    pub floor_eps: f64,
    pub renormalize: bool,
    /// Keep every n-th step in the returned trajectory.
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            horizon: 100.0,
            floor_eps: 1e-12,
            renormalize: true,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, m_x: usize, m_y: usize) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.dt > self.horizon {
            return Err(Error::InvalidConfig(format!(
                "dt {} exceeds horizon {}",
                self.dt, self.horizon
            )));
        }
        let cap = 1.0 / m_x.max(m_y) as f64;
        if !(self.floor_eps >= 0.0 && self.floor_eps < cap) {
            return Err(Error::InvalidConfig(format!(
                "floor_eps must lie in [0, {cap}), got {}",
                self.floor_eps
            )));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened when `horizon` is not a
    /// multiple of `dt`.
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// JSON form accepted on the command line:
/// `{"dt", "horizon", "floor_eps", "renormalize", "field"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct IntegratorFile {
    #[serde(flatten)]
    pub config: IntegratorConfig,
    #[serde(default)]
    pub field: FieldKind,
}

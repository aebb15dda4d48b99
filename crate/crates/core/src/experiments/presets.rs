//! Named experiment configurations.
//!
//! Horizons, start counts and seeds are choices made here; the coupled-game
//! horizons are long enough that the transients of every start have died
//! out.

use super::{
    ConvergenceSettings, ExperimentConfig, GameSpec, InitialConditions, ReferenceSpec,
};
use crate::dynamics::{FieldKind, IntegratorConfig};
use crate::error::{Error, Result};
use crate::game::CoupledVariant;

pub const PRESET_NAMES: [&str; 6] = [
    "mp",
    "mp-gda",
    "mp-memoryless",
    "cmp-interior",
    "cmp-continuous",
    "cmp-boundary",
];

/// Seed of the interior coupled game; its equilibrium has full support.
pub const INTERIOR_GAME_SEED: u64 = 0;

fn base(name: &str, game: GameSpec, field: FieldKind, horizon: f64, record_every: usize, count: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        game,
        field,
        integrator: IntegratorConfig {
            dt: 0.01,
            horizon,
            record_every,
            ..IntegratorConfig::default()
        },
        initial_conditions: InitialConditions::Random {
            count,
            seed: 1,
            floor: 0.01,
        },
        probes: Vec::new(),
        equilibrium: None,
        convergence: ConvergenceSettings::default(),
        output_path: None,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let coupled = |variant| GameSpec::Coupled {
        variant,
        seed: INTERIOR_GAME_SEED,
    };
    let cfg = match name {
        "mp" => base(name, GameSpec::MatchingPennies, FieldKind::Replicator, 500.0, 50, 100),
        "mp-gda" => base(name, GameSpec::MatchingPennies, FieldKind::GradientDescentAscent, 500.0, 50, 100),
        "mp-memoryless" => base(name, GameSpec::MatchingPennies, FieldKind::MemorylessReplicator, 100.0, 10, 10),
        "cmp-interior" => base(name, coupled(CoupledVariant::Interior), FieldKind::Replicator, 1000.0, 100, 20),
        "cmp-continuous" => base(name, coupled(CoupledVariant::Continuous), FieldKind::Replicator, 1000.0, 100, 20),
        "cmp-boundary" => {
            // Y's optimal set is not a single point in this game; diagnostics
            // reference the boundary point (1/2, 0, 1/2, 0).
            let mut cfg = base(name, coupled(CoupledVariant::Boundary), FieldKind::Replicator, 1000.0, 100, 20);
            cfg.equilibrium = Some(ReferenceSpec {
                x: vec![0.0, 0.5, 0.0, 0.5],
                y: vec![0.5, 0.0, 0.5, 0.0],
            });
            cfg
        }
        other => {
            return Err(Error::InvalidExperiment(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}

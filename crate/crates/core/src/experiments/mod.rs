//! Configured experiment runs: initial conditions, integration, diagnostics,
//! convergence reports and CSV/JSON output.

mod check;
mod convergence;
mod csv;
mod presets;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsEvaluator, Probe, ZeroSumVector};
use crate::dynamics::{integrate, FieldKind, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::game::{
    equilibrium_segment, make_coupled_matching_pennies, make_matching_pennies, solve_nash,
    CoupledVariant, EquilibriumInfo, EquilibriumSegmentParam, PayoffMatrix, DEFAULT_NASH_TOL,
};
use crate::strategy::{JointState, MixedStrategy, ReactiveStrategy};

pub use check::{run_checks, CheckOutcome};
pub use convergence::{detect_convergence, ConvergenceReport};
pub use csv::{header as csv_header, write_trajectory as write_trajectory_csv};
pub use presets::{preset, PRESET_NAMES};

/// Which game to play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GameSpec {
    MatchingPennies,
    Coupled {
        variant: CoupledVariant,
        #[serde(default)]
        seed: u64,
    },
    Inline {
        matrix: PayoffMatrix,
    },
}

impl GameSpec {
    pub fn build(&self) -> PayoffMatrix {
        match self {
            GameSpec::MatchingPennies => make_matching_pennies(),
            GameSpec::Coupled { variant, seed } => make_coupled_matching_pennies(*variant, *seed),
            GameSpec::Inline { matrix } => matrix.clone(),
        }
    }

    /// Convergence tolerance used when the config does not set one.
    pub fn default_tol(&self) -> f64 {
        match self {
            GameSpec::Coupled { .. } => 1e-2,
            _ => 1e-3,
        }
    }
}

/// An explicit starting point: the columns of X and Y's strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl StateSpec {
    pub fn build(&self) -> Result<JointState> {
        JointState::new(
            ReactiveStrategy::from_columns(&self.x)?,
            MixedStrategy::new(self.y.clone())?,
        )
    }
}

fn default_floor() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitialConditions {
    /// `count` independent draws, uniform on the simplex interior where every
    /// probability is at least `floor`.
    Random {
        count: usize,
        seed: u64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    Explicit {
        states: Vec<StateSpec>,
    },
}

/// Extra members of the Lyapunov family, on top of the spanning set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProbeSpec {
    Delta { label: String, delta: Vec<f64> },
    /// `δ = x - x*` for a strategy `x` of X.
    Strategy { label: String, x: Vec<f64> },
}

/// A reference equilibrium to use instead of the LP solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSettings {
    /// Defaults to 1e-3 for matching pennies and inline games and 1e-2 for
    /// the coupled games.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_window")]
    pub window_frac: f64,
}

fn default_window() -> f64 {
    0.1
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self {
            tol: None,
            window_frac: default_window(),
        }
    }
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub game: GameSpec,
    #[serde(default)]
    pub field: FieldKind,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub initial_conditions: InitialConditions,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
    #[serde(default)]
    pub equilibrium: Option<ReferenceSpec>,
    #[serde(default)]
    pub convergence: ConvergenceSettings,
    /// Directory receiving the CSV files and `summary.json`; nothing is
    /// written when absent.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidExperiment(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidExperiment(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn tol(&self) -> f64 {
        self.convergence.tol.unwrap_or_else(|| self.game.default_tol())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        let game = self.game.build();
        let (m_x, m_y) = (game.rows(), game.cols());
        self.integrator.validate(m_x, m_y)?;
        match &self.initial_conditions {
            InitialConditions::Random { count, floor, .. } => {
                if *count == 0 {
                    return bad("at least one initial condition is required".into());
                }
                let cap = 1.0 / m_x.max(m_y) as f64;
                if !(*floor >= 0.0 && *floor < cap) {
                    return bad(format!("sampling floor must lie in [0, {cap}), got {floor}"));
                }
            }
            InitialConditions::Explicit { states } => {
                if states.is_empty() {
                    return bad("at least one initial condition is required".into());
                }
                for s in states {
                    s.build()?.check_game(&game)?;
                }
            }
        }
        self.probes(&game, None)?;
        let tol = self.tol();
        if !(tol.is_finite() && tol > 0.0) {
            return bad(format!("convergence tol must be positive, got {tol}"));
        }
        let w = self.convergence.window_frac;
        if !(w > 0.0 && w <= 1.0) {
            return bad(format!("window_frac must lie in (0, 1], got {w}"));
        }
        Ok(())
    }

    /// The spanning set followed by the configured probes. Strategy probes
    /// need the equilibrium and are skipped when `eq` is `None`.
    fn probes(&self, game: &PayoffMatrix, eq: Option<&EquilibriumInfo>) -> Result<Vec<Probe>> {
        let mut probes = Probe::spanning(game.rows());
        for spec in &self.probes {
            match spec {
                ProbeSpec::Delta { label, delta } => {
                    let delta = ZeroSumVector::new(delta.clone())?;
                    if delta.len() != game.rows() {
                        return Err(Error::InvalidExperiment(format!(
                            "probe {label:?} has length {}, expected {}",
                            delta.len(),
                            game.rows()
                        )));
                    }
                    probes.push(Probe {
                        label: label.clone(),
                        delta,
                    });
                }
                ProbeSpec::Strategy { label, x } => {
                    let x = MixedStrategy::new(x.clone())?;
                    if let Some(eq) = eq {
                        probes.push(Probe::strategy(label, &x, eq)?);
                    }
                }
            }
        }
        Ok(probes)
    }

    fn equilibrium(&self, game: &PayoffMatrix) -> Result<EquilibriumInfo> {
        match &self.equilibrium {
            None => solve_nash(game, DEFAULT_NASH_TOL),
            Some(r) => EquilibriumInfo::from_strategies(
                game,
                MixedStrategy::new(r.x.clone())?,
                MixedStrategy::new(r.y.clone())?,
                DEFAULT_NASH_TOL,
            )
            .map_err(|e| Error::InvalidExperiment(format!("reference equilibrium: {e}"))),
        }
    }

    fn initial_states(&self, game: &PayoffMatrix) -> Result<Vec<JointState>> {
        match &self.initial_conditions {
            InitialConditions::Random { count, seed, floor } => Ok(sample_initial_states(
                game.rows(),
                game.cols(),
                *count,
                *seed,
                *floor,
                self.field == FieldKind::MemorylessReplicator,
            )),
            InitialConditions::Explicit { states } => states.iter().map(StateSpec::build).collect(),
        }
    }
}

/// A point drawn uniformly from `{p ∈ Δ : p_i ≥ floor}` via normalized
/// exponential spacings.
fn sample_simplex(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    let scale = 1.0 - floor * n as f64;
    w.iter().map(|v| floor + scale * v / total).collect()
}

/// Draws `count` joint states from one seeded stream: for each start, the
/// columns of X in order, then y. Memoryless starts repeat one column.
pub fn sample_initial_states(
    m_x: usize,
    m_y: usize,
    count: usize,
    seed: u64,
    floor: f64,
    memoryless: bool,
) -> Vec<JointState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = if memoryless {
                let col = sample_simplex(&mut rng, m_x, floor);
                ReactiveStrategy::memoryless(&MixedStrategy::from_vector_unchecked(nalgebra::DVector::from_vec(col)), m_y)
            } else {
                let cols: Vec<Vec<f64>> =
                    (0..m_y).map(|_| sample_simplex(&mut rng, m_x, floor)).collect();
                ReactiveStrategy::from_columns(&cols).expect("sampled columns lie on the simplex")
            };
            let y = MixedStrategy::new(sample_simplex(&mut rng, m_y, floor))
                .expect("sampled strategy lies on the simplex");
            JointState::new(x, y).expect("dimensions agree")
        })
        .collect()
}

/// One initial condition and what became of it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub index: usize,
    pub initial: JointState,
    /// Integration or diagnostics failures are kept per run; the rest of the
    /// experiment continues.
    pub outcome: Result<(Trajectory, ConvergenceReport)>,
    /// Largest single-step decrease of `q1 - q2` (2×2 replicator runs).
    pub max_q_gap_decrease: Option<f64>,
    pub csv_path: Option<PathBuf>,
}

impl RunRecord {
    pub fn report(&self) -> Option<&ConvergenceReport> {
        self.outcome.as_ref().ok().map(|(_, r)| r)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub game: PayoffMatrix,
    pub eq: EquilibriumInfo,
    pub segment: Option<EquilibriumSegmentParam>,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub index: usize,
    pub csv: Option<String>,
    pub report: Option<ConvergenceReport>,
    pub error: Option<String>,
    pub max_q_gap_decrease: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub field: FieldKind,
    pub integrator: IntegratorConfig,
    pub game: PayoffMatrix,
    pub equilibrium: EquilibriumInfo,
    pub segment: Option<EquilibriumSegmentParam>,
    pub tol: f64,
    pub window_frac: f64,
    pub total: usize,
    pub failed: usize,
    pub converged_y: usize,
    pub converged_x_st: usize,
    pub runs: Vec<RunSummary>,
}

impl ExperimentResult {
    pub fn reports(&self) -> impl Iterator<Item = &ConvergenceReport> {
        self.runs.iter().filter_map(RunRecord::report)
    }

    pub fn summary(&self) -> ExperimentSummary {
        let runs: Vec<RunSummary> = self
            .runs
            .iter()
            .map(|r| RunSummary {
                index: r.index,
                csv: r
                    .csv_path
                    .as_ref()
                    .and_then(|p| p.file_name())
                    .map(|n| n.to_string_lossy().into_owned()),
                report: r.report().cloned(),
                error: r.outcome.as_ref().err().map(ToString::to_string),
                max_q_gap_decrease: r.max_q_gap_decrease,
            })
            .collect();
        ExperimentSummary {
            name: self.config.name.clone(),
            field: self.config.field,
            integrator: self.config.integrator,
            game: self.game.clone(),
            equilibrium: self.eq.clone(),
            segment: self.segment.clone(),
            tol: self.config.tol(),
            window_frac: self.config.convergence.window_frac,
            total: runs.len(),
            failed: runs.iter().filter(|r| r.error.is_some()).count(),
            converged_y: self.reports().filter(|r| r.converged_y).count(),
            converged_x_st: self.reports().filter(|r| r.converged_x_st).count(),
            runs,
        }
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    game: &PayoffMatrix,
    eq: &EquilibriumInfo,
    segment: Option<&EquilibriumSegmentParam>,
    probes: &[Probe],
    index: usize,
    initial: JointState,
) -> RunRecord {
    let audit_q = game.rows() == 2 && game.cols() == 2 && cfg.field == FieldKind::Replicator;
    let mut prev_gap: Option<f64> = None;
    let mut worst_drop = 0.0f64;
    let mut q_audit = |_: usize, _: f64, s: &JointState, _: bool| {
        let x = s.x.probs();
        let gap = (x[(0, 0)].ln() - x[(1, 0)].ln()) - (x[(0, 1)].ln() - x[(1, 1)].ln());
        if let Some(p) = prev_gap {
            worst_drop = worst_drop.max(p - gap);
        }
        prev_gap = Some(gap);
    };
    let mut observers: Vec<&mut dyn crate::dynamics::Observer> = Vec::new();
    if audit_q {
        observers.push(&mut q_audit);
    }
    let traj = integrate(game, cfg.field, &initial, &cfg.integrator, &mut observers);
    drop(observers);

    let csv_path = cfg
        .output_path
        .as_ref()
        .map(|dir| dir.join(format!("{}_{index:03}.csv", cfg.name)));
    let outcome = traj.and_then(|traj| {
        if let Some(path) = &csv_path {
            let evaluator =
                DiagnosticsEvaluator::new(game, eq, cfg.field).with_probes(probes.to_vec());
            let mut out = BufWriter::new(fs::File::create(path)?);
            write_trajectory_csv(&mut out, &traj, &evaluator)?;
            std::io::Write::flush(&mut out)?;
        }
        let report = detect_convergence(
            &traj,
            eq,
            segment,
            cfg.tol(),
            cfg.convergence.window_frac,
        );
        Ok((traj, report))
    });
    RunRecord {
        index,
        initial,
        outcome,
        max_q_gap_decrease: audit_q.then_some(worst_drop),
        csv_path,
    }
}

/// Runs every initial condition of `cfg` (in parallel) and, when an output
/// directory is configured, writes one CSV per trajectory and `summary.json`.
///
/// Output is deterministic given the config: starts are drawn up front from
/// a single seeded stream and results are collected in start order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let game = cfg.game.build();
    let eq = cfg.equilibrium(&game)?;
    let segment = equilibrium_segment(&game, &eq);
    let probes = cfg.probes(&game, Some(&eq))?;
    let starts = cfg.initial_states(&game)?;
    if let Some(dir) = &cfg.output_path {
        fs::create_dir_all(dir)?;
    }

    let runs: Vec<RunRecord> = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, s)| run_one(cfg, &game, &eq, segment.as_ref(), &probes, index, s))
        .collect();

    let result = ExperimentResult {
        config: cfg.clone(),
        game,
        eq,
        segment,
        runs,
    };
    if let Some(dir) = &cfg.output_path {
        let json = serde_json::to_string_pretty(&result.summary()).expect("summary serializes");
        fs::write(dir.join("summary.json"), json + "\n")?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip_and_defaults() {
        let text = r#"{
            "name": "demo",
            "game": {"type": "coupled", "variant": "interior", "seed": 3},
            "field": "gda",
            "integrator": {"dt": 0.05, "horizon": 2},
            "initial_conditions": {"type": "random", "count": 2, "seed": 9},
            "probes": [{"type": "delta", "label": "d", "delta": [1, -1, 0, 0]}]
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.field, FieldKind::GradientDescentAscent);
        assert_eq!(cfg.tol(), 1e-2);
        assert_eq!(cfg.convergence.window_frac, 0.1);
        assert!(matches!(
            cfg.initial_conditions,
            InitialConditions::Random { floor, .. } if floor == 0.01
        ));
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = r#""game": {"type": "matching-pennies"}"#;
        for bad in [
            format!(r#"{{{base}, "initial_conditions": {{"type": "random", "count": 0, "seed": 1}}}}"#),
            format!(r#"{{{base}, "initial_conditions": {{"type": "explicit", "states": []}}}}"#),
            format!(
                r#"{{{base}, "initial_conditions": {{"type": "random", "count": 1, "seed": 1}},
                   "probes": [{{"type": "delta", "label": "d", "delta": [1, 1]}}]}}"#
            ),
            format!(r#"{{{base}, "initial_conditions": {{"type": "random", "count": 1, "seed": 1}},
                   "integrator": {{"dt": -1}}}}"#),
            r#"{"game": {"type": "nope"}}"#.to_string(),
        ] {
            assert!(ExperimentConfig::from_json(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn samples_respect_floor_and_are_deterministic() {
        let a = sample_initial_states(4, 4, 5, 7, 0.01, false);
        let b = sample_initial_states(4, 4, 5, 7, 0.01, false);
        assert_eq!(a, b);
        for s in &a {
            assert!(s.simplex_violation() < 1e-12);
            assert!(s.x.probs().min() >= 0.01 - 1e-15);
            assert!(s.y.probs().min() >= 0.01 - 1e-15);
        }
        let m = sample_initial_states(2, 2, 3, 7, 0.01, true);
        for s in &m {
            assert_eq!(s.x.column(0), s.x.column(1));
        }
    }

    #[test]
    fn explicit_run_reports_per_start() {
        let cfg = ExperimentConfig {
            name: "t".into(),
            game: GameSpec::MatchingPennies,
            field: FieldKind::Replicator,
            integrator: IntegratorConfig {
                horizon: 200.0,
                record_every: 100,
                ..IntegratorConfig::default()
            },
            initial_conditions: InitialConditions::Explicit {
                states: vec![StateSpec {
                    x: vec![vec![0.3, 0.7], vec![0.6, 0.4]],
                    y: vec![0.8, 0.2],
                }],
            },
            probes: vec![],
            equilibrium: None,
            convergence: ConvergenceSettings::default(),
            output_path: None,
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.runs.len(), 1);
        let report = res.runs[0].report().unwrap();
        assert!(report.converged_y, "{report:?}");
        assert!(report.time_to_tol.is_some());
        assert!(res.runs[0].max_q_gap_decrease.unwrap() <= 1e-8);
    }
}

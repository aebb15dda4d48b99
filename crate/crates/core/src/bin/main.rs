use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use reactive_dynamics::dynamics::FieldKind;
use reactive_dynamics::experiments::{
    preset, run_checks, run_experiment, ExperimentConfig, InitialConditions,
};
use reactive_dynamics::game::{solve_nash, PayoffMatrix, DEFAULT_NASH_TOL};
use reactive_dynamics::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(version, about = "Learning dynamics of a reactive player against a memoryless player in zero-sum games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game file and print its equilibrium as JSON.
    Nash { game: PathBuf },
    /// Run the experiment described by a JSON config.
    Simulate {
        config: Option<PathBuf>,
        #[arg(long = "config", conflicts_with = "config")]
        config_flag: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a named preset: mp, mp-gda, mp-memoryless, cmp-interior,
    /// cmp-continuous, cmp-boundary.
    Experiment {
        preset: Option<String>,
        #[arg(long = "preset", conflicts_with = "preset")]
        preset_flag: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the invariant suite; exits 1 if any check fails.
    Check,
}

#[derive(Args)]
struct Overrides {
    /// Output directory for CSV files and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomly sampled initial conditions.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// replicator | gda | memoryless
    #[arg(long)]
    field: Option<FieldKind>,
}

impl Overrides {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(out) = self.out {
            cfg.output_path = Some(out);
        }
        if let Some(s) = self.seed {
            match &mut cfg.initial_conditions {
                InitialConditions::Random { seed, .. } => *seed = s,
                InitialConditions::Explicit { .. } => {
                    return Err(Error::InvalidExperiment(
                        "--seed needs randomly sampled initial conditions".into(),
                    ))
                }
            }
        }
        if let Some(dt) = self.dt {
            cfg.integrator.dt = dt;
        }
        if let Some(h) = self.horizon {
            cfg.integrator.horizon = h;
        }
        if let Some(f) = self.field {
            cfg.field = f;
        }
        cfg.validate()
    }
}

fn nash(path: PathBuf) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::InvalidExperiment(format!("{}: {e}", path.display())))?;
    let game: PayoffMatrix =
        serde_json::from_str(&text).map_err(|e| Error::InvalidExperiment(e.to_string()))?;
    let info = solve_nash(&game, DEFAULT_NASH_TOL)?;
    println!("{}", serde_json::to_string_pretty(&info).expect("equilibrium serializes"));
    Ok(ExitCode::SUCCESS)
}

fn run(mut cfg: ExperimentConfig, overrides: Overrides) -> Result<ExitCode, Error> {
    overrides.apply(&mut cfg)?;
    let start = Instant::now();
    let result = run_experiment(&cfg)?;
    let s = result.summary();
    println!(
        "{}: {}/{} converged_y, {}/{} converged_x_st, {} failed ({:.2}s)",
        s.name,
        s.converged_y,
        s.total,
        s.converged_x_st,
        s.total,
        s.failed,
        start.elapsed().as_secs_f64()
    );
    for r in &s.runs {
        if let Some(e) = &r.error {
            eprintln!("run {}: {e}", r.index);
        }
    }
    if let Some(dir) = &cfg.output_path {
        println!("wrote {}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn check() -> ExitCode {
    let outcomes = run_checks();
    let mut failed = 0;
    for c in &outcomes {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{}/{} checks passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Nash { game } => nash(game),
        Command::Simulate {
            config,
            config_flag,
            overrides,
        } => match config.or(config_flag) {
            Some(path) => ExperimentConfig::from_path(&path).and_then(|cfg| run(cfg, overrides)),
            None => Err(Error::InvalidExperiment("simulate needs a config file".into())),
        },
        Command::Experiment {
            preset: name,
            preset_flag,
            mut overrides,
        } => match name.or(preset_flag) {
            Some(name) => preset(&name).and_then(|cfg| {
                if overrides.out.is_none() {
                    overrides.out = Some(PathBuf::from("out").join(&name));
                }
                run(cfg, overrides)
            }),
            None => Err(Error::InvalidExperiment("experiment needs a preset name".into())),
        },
        Command::Check => Ok(check()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidExperiment(_)
                | Error::InvalidConfig(_)
                | Error::InvalidPayoff(_)
                | Error::NotOnSimplex(_)
                | Error::NotZeroSum(_)
                | Error::DimensionMismatch { .. } => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}

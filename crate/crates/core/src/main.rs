//! Thin command-line front end; all logic lives in the `ghz_aic` library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ghz_aic::cli::{
    self, parse_list, resolve_config_file, CommonArgs, KeyValueConfig, ModelKind,
};
use ghz_aic::selection::{AutoGrid, ScalingConfig, SweepConfig};
use ghz_aic::Error;

#[derive(Parser)]
#[command(
    name = "ghz-aic",
    version,
    about = "Simulated GHZ-state experiments with AIC model selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// Population imbalance ε of the base state.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Systematic phase φ of the base state.
    #[arg(long)]
    phi: Option<f64>,
    /// Coherence δ of the base state.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Repetitions of the experiment.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed; every stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output root directory (default `runs`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = default pool).
    #[arg(long)]
    workers: Option<usize>,
    /// First auto-grid point, in shots per setting.
    #[arg(long)]
    start_factor: Option<u64>,
    /// Auto-grid budget ceiling in total shots.
    #[arg(long)]
    ceiling: Option<u64>,
    /// Reuse repetition 0's perturbation for every repetition.
    #[arg(long)]
    fixed_perturbation: bool,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one synthetic counts dataset and write CSV + metadata.
    Simulate {
        #[arg(long)]
        qubits: Option<usize>,
        /// Weight of the wrong-type (PI, orthogonal) error component.
        #[arg(long)]
        q: Option<f64>,
        /// Total number of shots M (all settings together).
        #[arg(long)]
        shots: Option<u64>,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit one model to a counts CSV and write the result JSON.
    Fit {
        /// Model to fit: `3p` or `pi`.
        #[arg(long)]
        model: String,
        /// Dataset CSV produced by `simulate`.
        data: PathBuf,
        /// Output JSON path (default: next to the dataset).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ΔAIC sweep over an explicit measurement grid.
    Sweep {
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        /// Comma-separated ascending measurement budgets.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Crossing point vs qubit number at fixed q (auto-widening grid).
    ScalingN {
        #[arg(long)]
        q: Option<f64>,
        /// Comma-separated qubit numbers, e.g. 4,5,6,7.
        #[arg(long)]
        n_list: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Crossing point vs perturbation strength at fixed N.
    ScalingQ {
        #[arg(long)]
        qubits: Option<usize>,
        /// Comma-separated q values, e.g. 0.01,0.02,0.04.
        #[arg(long)]
        q_list: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare the block engine against the brute-force oracle (N ≤ 6).
    OracleCheck {
        #[arg(long)]
        qubits: Option<usize>,
        /// Number of random states to check.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn resolve_state(state: &StateArgs, file: &mut KeyValueConfig) -> Result<(f64, f64, f64), Error> {
    let take = |cli: Option<f64>, key: &str, default: f64, file: &mut KeyValueConfig| {
        match (cli, file.take(key)) {
            (Some(v), _) => Ok(v),
            (None, Some(text)) => text
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("config key `{key}`: `{text}`"))),
            (None, None) => Ok(default),
        }
    };
    Ok((
        take(state.epsilon, "epsilon", 0.0, file)?,
        take(state.phi, "phi", 0.0, file)?,
        take(state.delta, "delta", 1.0, file)?,
    ))
}

fn resolve_run(run: RunArgs, file: &mut KeyValueConfig) -> Result<CommonArgs, Error> {
    cli::resolve_common(
        file,
        run.reps,
        run.seed,
        run.out,
        run.workers,
        run.start_factor,
        run.ceiling,
        run.fixed_perturbation,
    )
}

fn take_scalar<T: std::str::FromStr>(
    cli: Option<T>,
    file: &mut KeyValueConfig,
    key: &str,
) -> Result<T, Error> {
    match (cli, file.take(key)) {
        (Some(v), _) => Ok(v),
        (None, Some(text)) => text
            .parse::<T>()
            .map_err(|_| Error::invalid(format!("config key `{key}`: `{text}`"))),
        (None, None) => Err(Error::invalid(format!(
            "missing required option --{key} (or config key `{key}`)"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            qubits,
            q,
            shots,
            state,
            seed,
            out,
            config,
        } => {
            let mut file = resolve_config_file(config.as_deref())?;
            let qubits = take_scalar(qubits, &mut file, "qubits")?;
            let q = take_scalar(q.or(Some(0.0)), &mut file, "q")?;
            let shots = take_scalar(shots, &mut file, "shots")?;
            let (epsilon, phi, delta) = resolve_state(&state, &mut file)?;
            let seed = take_scalar(seed.or(Some(0)), &mut file, "seed")?;
            let out = out
                .or_else(|| file.take("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("runs"));
            file.finish()?;
            let dir = cli::cmd_simulate(qubits, q, epsilon, phi, delta, shots, seed, &out)?;
            println!("{}", dir.display());
        }
        Command::Fit { model, data, out } => {
            let model: ModelKind = model.parse()?;
            let path = cli::cmd_fit(&data, model, out.as_deref())?;
            eprintln!("wrote {}", path.display());
        }
        Command::Sweep {
            qubits,
            q,
            grid,
            state,
            run,
        } => {
            let mut file = resolve_config_file(run.config.as_deref())?;
            let qubits = take_scalar(qubits, &mut file, "qubits")?;
            let q = take_scalar(q.or(Some(0.0)), &mut file, "q")?;
            let grid_text = match (grid, file.take("grid")) {
                (Some(g), _) => g,
                (None, Some(g)) => g,
                (None, None) => {
                    return Err(Error::invalid(
                        "missing required option --grid (or config key `grid`)",
                    ))
                }
            };
            let m_grid: Vec<u64> = parse_list(&grid_text, "grid")?;
            let (epsilon, phi, delta) = resolve_state(&state, &mut file)?;
            let common = resolve_run(run, &mut file)?;
            file.finish()?;
            let mut config = SweepConfig::new(qubits, q, m_grid, common.reps, common.seed);
            config.epsilon = epsilon;
            config.phi = phi;
            config.delta = delta;
            config.fresh_perturbation = !common.fixed_perturbation;
            let dir = cli::cmd_sweep(config, common.workers, &common.out)?;
            println!("{}", dir.display());
        }
        Command::ScalingN { q, n_list, run } => {
            let mut file = resolve_config_file(run.config.as_deref())?;
            let q = take_scalar(q, &mut file, "q")?;
            let list_text = match (n_list, file.take("n-list")) {
                (Some(t), _) => t,
                (None, Some(t)) => t,
                (None, None) => {
                    return Err(Error::invalid(
                        "missing required option --n-list (or config key `n-list`)",
                    ))
                }
            };
            let n_list: Vec<usize> = parse_list(&list_text, "n-list")?;
            let common = resolve_run(run, &mut file)?;
            file.finish()?;
            let scaling = scaling_from(&common);
            let dir = cli::cmd_scaling_n(q, n_list, scaling, common.workers, &common.out)?;
            println!("{}", dir.display());
        }
        Command::ScalingQ {
            qubits,
            q_list,
            run,
        } => {
            let mut file = resolve_config_file(run.config.as_deref())?;
            let qubits = take_scalar(qubits, &mut file, "qubits")?;
            let list_text = match (q_list, file.take("q-list")) {
                (Some(t), _) => t,
                (None, Some(t)) => t,
                (None, None) => {
                    return Err(Error::invalid(
                        "missing required option --q-list (or config key `q-list`)",
                    ))
                }
            };
            let q_list: Vec<f64> = parse_list(&list_text, "q-list")?;
            let common = resolve_run(run, &mut file)?;
            file.finish()?;
            let scaling = scaling_from(&common);
            let dir = cli::cmd_scaling_q(qubits, q_list, scaling, common.workers, &common.out)?;
            println!("{}", dir.display());
        }
        Command::OracleCheck {
            qubits,
            samples,
            seed,
        } => {
            let report = cli::cmd_oracle_check(
                qubits.unwrap_or(4),
                samples.unwrap_or(50),
                seed.unwrap_or(0),
            )?;
            println!("max deviation {:.3e}", report.max_deviation);
            if !report.passed {
                eprintln!("oracle check FAILED (threshold 1e-9)");
                return Err(Error::Internal("oracle equivalence violated".into()));
            }
            println!("oracle check passed");
        }
    }
    Ok(())
}

fn scaling_from(common: &CommonArgs) -> ScalingConfig {
    let mut scaling = ScalingConfig::new(common.reps, common.seed);
    scaling.auto = AutoGrid {
        start_factor: common.start_factor,
        ceiling: common.ceiling,
    };
    scaling.fresh_perturbation = !common.fixed_perturbation;
    scaling
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

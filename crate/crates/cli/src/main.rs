//! `stabfield` batch runner.

mod config;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;

#[derive(Parser)]
#[command(name = "stabfield", version, about = "Fidelity of stabilizer states under random local fields")]
struct Cli {
    /// Worker threads; 0 uses the available parallelism. Results do not
    /// depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Experiment {
    /// JSON experiment config. Optional when `--model` and `--out` suffice.
    config: Option<PathBuf>,
    /// Built-in model name or model file; replaces `model`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity traces of one noise ensemble.
    Trace(Experiment),
    /// Windowed average fidelity over a grid of field scales, with thresholds.
    Sweep(Experiment),
    /// Thresholds for several sizes of one code family and their linear fit.
    Scaling(Experiment),
    /// Infidelity against the number of fluctuating qubits.
    Defects(Experiment),
    /// Energy levels of a model's stabilizer Hamiltonian.
    Spectrum {
        /// Built-in model name or model file.
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the two-qubit closed forms and the integrator against dense
    /// linear algebra on random fields.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

fn resolve(e: &Experiment) -> Result<ExperimentConfig, CliError> {
    let (mut config, base) = match &e.config {
        Some(path) => (
            ExperimentConfig::load(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    config.apply(&Overrides {
        model: e.model.clone(),
        seed: e.seed,
        out: e.out.clone(),
        dt: e.dt,
        t_max: e.t_max,
        alpha: e.alpha,
    });
    config.inline_models(&base)?;
    Ok(config)
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Trace(e) => run::trace(&resolve(e)?),
        Command::Sweep(e) => run::sweep(&resolve(e)?),
        Command::Scaling(e) => run::scaling(&resolve(e)?),
        Command::Defects(e) => run::defects(&resolve(e)?),
        Command::Spectrum { model, out } => run::spectrum(model, out.as_deref()),
        Command::OracleCheck { draws, seed, tol } => run::oracle_check(*draws, *seed, *tol),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: jobs: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

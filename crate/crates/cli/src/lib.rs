//! Command-line front end: one TOML file describes a model, a grid and a run.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 configuration or
//! I/O error, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::Parser;
use uhlmann_core::Error;

pub use config::RunConfig;

/// Environment variable that overrides `[output] dir` (but not `--out`).
pub const OUT_ENV: &str = "UHLMANN_OUT";

const DEFAULT_OUT_DIR: &str = "uhlmann-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {}", .0.join(", "))]
    Verify(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModel(_)
            | Error::InvalidGrid(_)
            | Error::InvalidTemperature(_)
            | Error::DimensionMismatch { .. }
            | Error::ManifoldMismatch { .. }
            | Error::StepTooLarge { .. }
            | Error::TruncationTooSmall { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "uhlmann", version, about = "Thermal Uhlmann-Chern numbers from a TOML run file")]
pub struct Args {
    /// Run file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Worker threads; overrides `run.workers`.
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
    /// Output directory; overrides `UHLMANN_OUT` and `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Output directory after applying `--out`, then `UHLMANN_OUT`, then the
/// config file.
pub fn output_dir(args_out: Option<PathBuf>, env: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    args_out
        .or(env)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs the command described by `args` and returns the process exit code.
pub fn run(args: Args) -> i32 {
    match execute(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let workers = args.workers.or(cfg.run.workers);
    if workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let out = output_dir(args.out, std::env::var_os(OUT_ENV).map(PathBuf::from), &cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let workers = pool.current_num_threads();
    pool.install(|| commands::dispatch(&cfg, &out, workers))
}

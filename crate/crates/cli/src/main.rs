//! dplab: calibrate Gaussian release noise, compute detection thresholds and
//! ROC curves, validate them against Monte Carlo, and sweep privacy metrics.
//!
//! Exit codes: 0 success, 1 numerical check failure or I/O error,
//! 2 precondition violation (reported as `error: <field>: <constraint>`).

mod commands;
mod config;
mod grid;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    /// Precondition violation, message shaped `<field>: <constraint>`.
    Validation(String),
    /// Runtime failure outside the numeric contract (I/O and friends).
    Runtime(String),
    /// A check ran and failed; details are already in the report.
    CheckFailed,
}

impl CliError {
    pub fn validation(field: &'static str, constraint: impl fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {constraint}"))
    }
}

impl From<dplab_core::Error> for CliError {
    fn from(e: dplab_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "dplab",
    version,
    about = "Gaussian-noise calibration, attack-detection thresholds, and privacy-metric sweeps"
)]
struct Cli {
    /// JSON config file; explicit flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// RNG seed (fallback: config file, then DPLAB_SEED, then 42)
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the noise scale sigma_z for a privacy budget
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Write analytic ROC curves over an (epsilon, impact) grid
    Roc(commands::roc::RocArgs),
    /// Check Monte Carlo detection rates against the analytic values
    Validate(commands::validate::ValidateArgs),
    /// Information leakage expansions and the attack-variance ceiling
    Bounds(commands::bounds::BoundsArgs),
    /// KL vs Chernoff compliance sweep over an epsilon grid
    Metrics(commands::metrics::MetricsArgs),
}

const DEFAULT_SEED: u64 = 42;

fn resolve_seed(flag: Option<u64>, cfg: &FileConfig) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = cfg.seed {
        return Ok(s);
    }
    match std::env::var("DPLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::validation("seed", format!("DPLAB_SEED must be an unsigned integer, got {v:?}"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    let seed = resolve_seed(cli.seed, &cfg)?;
    match cli.command {
        Command::Calibrate(a) => commands::calibrate::run(a, &cfg, seed),
        Command::Roc(a) => commands::roc::run(a, &cfg, seed),
        Command::Validate(a) => commands::validate::run(a, &cfg, seed),
        Command::Bounds(a) => commands::bounds::run(a, &cfg, seed),
        Command::Metrics(a) => commands::metrics::run(a, &cfg, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::CheckFailed) => ExitCode::from(1),
    }
}

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use dplab_core::mechanism::{calibrate_noise_with_mode, PrivacyBudget, Sensitivity};

use crate::config::{require_f64, require_scalar, resolve_mode, FileConfig, ModeArg};
use crate::manifest::deliver_report;
use crate::CliError;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// privacy budget epsilon (> 0)
    #[arg(long)]
    pub eps: Option<f64>,

    /// privacy budget delta, in (0, 1)
    #[arg(long)]
    pub delta: Option<f64>,

    /// L2 global sensitivity of the query (> 0)
    #[arg(long)]
    pub s: Option<f64>,

    /// noise-variance rule to apply
    #[arg(long, value_enum)]
    pub calibration_mode: Option<ModeArg>,

    /// write the report here instead of stdout (manifest written alongside)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: CalibrateArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let eps = require_scalar(args.eps, cfg.eps.as_ref(), "eps")?;
    let delta = require_f64(args.delta, cfg.delta, "delta")?;
    let s = require_f64(args.s, cfg.s, "s")?;
    let mode = resolve_mode(args.calibration_mode, cfg)?;
    let out = args.out.or_else(|| cfg.out.clone());

    let budget = PrivacyBudget::new(eps, delta)?;
    let sens = Sensitivity::new(s)?;
    let sigma = calibrate_noise_with_mode(budget, sens, mode.to_mode())?;

    let mut report = String::new();
    let _ = writeln!(report, "mode = {}", mode.token());
    let _ = writeln!(report, "eps = {eps}");
    let _ = writeln!(report, "delta = {delta}");
    let _ = writeln!(report, "s = {s}");
    let _ = writeln!(report, "sigma_z = {}", sigma.value());
    let _ = writeln!(report, "sigma_z^2 = {}", sigma.variance());

    let echo = serde_json::json!({
        "eps": eps,
        "delta": delta,
        "s": s,
        "calibration_mode": mode.token(),
    });
    deliver_report(&report, out.as_deref(), "calibrate", seed, echo)
}

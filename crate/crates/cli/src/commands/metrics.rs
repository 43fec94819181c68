use std::path::PathBuf;

use clap::Args;

use dplab_core::dp_metrics::{divergence_compliance_sweep, write_sweep_csv};
use dplab_core::mechanism::Sensitivity;

use crate::config::{
    delta_rule_echo, grid_with_default, resolve_delta_rule, resolve_mode, DeltaRuleArg,
    FileConfig, ModeArg,
};
use crate::manifest::{sibling_manifest_path, write_file, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// epsilon grid, `a,b,c` or `lo:step:hi` [default: 0.1:0.1:5]
    #[arg(long)]
    pub eps: Option<String>,

    /// attack impacts delta_mu, nonzero [default: 8,16 around s=4]
    #[arg(long)]
    pub dmu: Option<String>,

    /// L2 global sensitivity (> 0) [default: 4]
    #[arg(long)]
    pub s: Option<f64>,

    /// how delta is derived from each epsilon
    #[arg(long, value_enum)]
    pub delta_rule: Option<DeltaRuleArg>,

    /// constant delta (selects the constant delta rule)
    #[arg(long)]
    pub delta: Option<f64>,

    /// noise-variance rule to apply
    #[arg(long, value_enum)]
    pub calibration_mode: Option<ModeArg>,

    /// output CSV path [default: metrics.csv]; manifest written alongside
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: MetricsArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let eps = grid_with_default(args.eps.as_deref(), cfg.eps.as_ref(), "0.1:0.1:5", "eps")?;
    let dmu = grid_with_default(args.dmu.as_deref(), cfg.dmu.as_ref(), "8,16", "dmu")?;
    let s = args.s.or(cfg.s).unwrap_or(4.0);
    let rule = resolve_delta_rule(args.delta_rule, args.delta, cfg)?;
    let mode = resolve_mode(args.calibration_mode, cfg)?;
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("metrics.csv"));

    if !(s.is_finite() && s > 0.0) {
        return Err(CliError::validation(
            "s",
            format!("must be strictly positive for a sweep, got {s}"),
        ));
    }
    let sens = Sensitivity::new(s)?;
    // the sweep is parameterized by impact multipliers m with delta_mu = m*s
    let multipliers: Vec<f64> = dmu.iter().map(|d| d / s).collect();

    let rows = divergence_compliance_sweep(sens, rule, &eps, &multipliers, mode.to_mode())?;
    let mut bytes = Vec::new();
    write_sweep_csv(&mut bytes, &rows)
        .map_err(|e| CliError::Runtime(format!("serializing sweep: {e}")))?;
    write_file(&out, &bytes)?;

    let echo = serde_json::json!({
        "eps": eps,
        "dmu": dmu,
        "s": s,
        "delta_rule": delta_rule_echo(rule),
        "calibration_mode": mode.token(),
        "out": out.display().to_string(),
    });
    let mut manifest = RunManifest::new("metrics", seed, echo);
    manifest.record(
        out.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| out.display().to_string()),
        &bytes,
    );
    manifest.write_to(&sibling_manifest_path(&out))?;

    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

use std::fs;
use std::path::PathBuf;

use clap::Args;

use dplab_core::detector::{roc_curve, write_roc_csv, RocMetadata};
use dplab_core::mechanism::{calibrate_noise_with_mode, Sensitivity};
use dplab_core::stdnorm::Probability;

use crate::config::{
    delta_rule_echo, grid_with_default, resolve_delta_rule, resolve_mode, DeltaRuleArg,
    FileConfig, ModeArg,
};
use crate::manifest::{write_file, RunManifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct RocArgs {
    /// epsilon grid, `a,b,c` or `lo:step:hi` [default: 0.5,1,2,4]
    #[arg(long)]
    pub eps: Option<String>,

    /// attack impact grid, nonzero [default: 8,4,2 around s=4]
    #[arg(long)]
    pub dmu: Option<String>,

    /// L2 global sensitivity (> 0)
    #[arg(long)]
    pub s: Option<f64>,

    /// how delta is derived from each epsilon
    #[arg(long, value_enum)]
    pub delta_rule: Option<DeltaRuleArg>,

    /// constant delta (selects the constant delta rule)
    #[arg(long)]
    pub delta: Option<f64>,

    /// false-alarm grid, strictly increasing in (0,1) [default: 0.01:0.01:0.99]
    #[arg(long)]
    pub alpha_grid: Option<String>,

    /// noise-variance rule to apply
    #[arg(long, value_enum)]
    pub calibration_mode: Option<ModeArg>,

    /// output directory for the curve CSVs and manifest [default: roc_out]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: RocArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let eps = grid_with_default(args.eps.as_deref(), cfg.eps.as_ref(), "0.5,1,2,4", "eps")?;
    let dmu = grid_with_default(args.dmu.as_deref(), cfg.dmu.as_ref(), "8,4,2", "dmu")?;
    let s = args.s.or(cfg.s).unwrap_or(4.0);
    let rule = resolve_delta_rule(args.delta_rule, args.delta, cfg)?;
    let alphas_raw = grid_with_default(
        args.alpha_grid.as_deref(),
        cfg.alpha_grid.as_ref(),
        "0.01:0.01:0.99",
        "alpha_grid",
    )?;
    let mode = resolve_mode(args.calibration_mode, cfg)?;
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("roc_out"));

    if dmu.iter().any(|d| *d == 0.0) {
        return Err(CliError::validation("dmu", "impact must be nonzero"));
    }
    let sens = Sensitivity::new(s)?;
    let mut alphas = Vec::with_capacity(alphas_raw.len());
    for &a in &alphas_raw {
        alphas.push(Probability::new(a).map_err(|_| {
            CliError::validation("alpha_grid", format!("values must lie in (0,1), got {a}"))
        })?);
    }

    fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;

    let echo = serde_json::json!({
        "eps": eps,
        "dmu": dmu,
        "s": s,
        "delta_rule": delta_rule_echo(rule),
        "alpha_grid": alphas_raw,
        "calibration_mode": mode.token(),
        "out": out.display().to_string(),
    });
    let mut manifest = RunManifest::new("roc", seed, echo);

    for &e in &eps {
        let budget = rule.budget_for(e)?;
        let sigma = calibrate_noise_with_mode(budget, sens, mode.to_mode())?;
        for &d in &dmu {
            let metadata = RocMetadata {
                delta_mu: d,
                sigma_z: sigma.value(),
                epsilon: e,
                delta: budget.delta(),
                s,
            };
            let curve = roc_curve(metadata, &alphas)?;
            let mut bytes = Vec::new();
            write_roc_csv(&mut bytes, &curve)
                .map_err(|e| CliError::Runtime(format!("serializing curve: {e}")))?;
            let name = format!("roc_eps{e}_dmu{d}.csv");
            write_file(&out.join(&name), &bytes)?;
            manifest.record(name, &bytes);
        }
    }

    manifest.write_to(&out.join("manifest.json"))?;
    println!(
        "wrote {} curves and manifest.json to {}",
        eps.len() * dmu.len(),
        out.display()
    );
    Ok(())
}

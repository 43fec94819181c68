use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use dplab_core::detector::{binomial_band, monte_carlo_rates, power, DetectorDesign, HypothesisPair};
use dplab_core::mechanism::{calibrate_noise_with_mode, Sensitivity};
use dplab_core::stdnorm::{Probability, RandomStream};

use crate::config::{
    delta_rule_echo, grid_with_default, resolve_delta_rule, resolve_mode, DeltaRuleArg,
    FileConfig, ModeArg,
};
use crate::manifest::deliver_report;
use crate::CliError;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// epsilon grid [default: 0.5,1,2,4]
    #[arg(long)]
    pub eps: Option<String>,

    /// attack impact grid, nonzero [default: 2,4,8,16]
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

    /// false-alarm sizes to test [default: 0.01,0.05,0.1,0.3]
    #[arg(long)]
    pub alpha_grid: Option<String>,

    /// Monte Carlo trials per hypothesis [default: 1000000]
    #[arg(long)]
    pub trials: Option<u64>,

    /// noise-variance rule to apply
    #[arg(long, value_enum)]
    pub calibration_mode: Option<ModeArg>,

    /// write the report here instead of stdout (manifest written alongside)
    #[arg(long)]
    pub out: Option<PathBuf>,

    // Shifts the analytic power used as the band center; exists so the
    // harness can prove a broken closed form makes this command exit 1.
    #[arg(long, hide = true)]
    pub selfcheck_power_bias: Option<f64>,
}

pub fn run(args: ValidateArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let eps = grid_with_default(args.eps.as_deref(), cfg.eps.as_ref(), "0.5,1,2,4", "eps")?;
    let dmu = grid_with_default(args.dmu.as_deref(), cfg.dmu.as_ref(), "2,4,8,16", "dmu")?;
    let alphas = grid_with_default(
        args.alpha_grid.as_deref(),
        cfg.alpha_grid.as_ref(),
        "0.01,0.05,0.1,0.3",
        "alpha_grid",
    )?;
    let s = args.s.or(cfg.s).unwrap_or(4.0);
    let rule = resolve_delta_rule(args.delta_rule, args.delta, cfg)?;
    let trials = args.trials.or(cfg.trials).unwrap_or(1_000_000);
    let mode = resolve_mode(args.calibration_mode, cfg)?;
    let out = args.out.or_else(|| cfg.out.clone());
    let bias = args.selfcheck_power_bias.unwrap_or(0.0);

    if trials == 0 {
        return Err(CliError::validation("trials", "must be at least 1"));
    }
    if dmu.iter().any(|d| *d == 0.0) {
        return Err(CliError::validation("dmu", "impact must be nonzero"));
    }
    let sens = Sensitivity::new(s)?;

    let mut report = String::new();
    let _ = writeln!(report, "trials = {trials}");
    let _ = writeln!(report, "seed = {seed}");
    if trials < 10_000 {
        let _ = writeln!(
            report,
            "warning: fewer than 10000 trials; the 3-sigma bands below are wide and this check has low power"
        );
    }
    let _ = writeln!(
        report,
        "{:<6} {:<8} {:<5} {:<6} {:<12} {:<12} {:<12} {:<12} {:<12} result",
        "eps", "delta", "dmu", "alpha", "analytic", "alpha_hat", "power_hat", "band_alpha", "band_power"
    );

    let stream = RandomStream::from_seed(seed);
    let mut design_index = 0u64;
    let mut checks = 0u64;
    let mut failures = 0u64;

    for &e in &eps {
        let budget = rule.budget_for(e)?;
        let sigma = calibrate_noise_with_mode(budget, sens, mode.to_mode())?;
        for &d in &dmu {
            let pair = HypothesisPair::with_impact(d, sigma)?;
            for &a in &alphas {
                let alpha = Probability::new(a).map_err(|_| {
                    CliError::validation("alpha_grid", format!("values must lie in (0,1), got {a}"))
                })?;
                let design = DetectorDesign::new(pair, alpha)?;
                let analytic = power(alpha, d, sigma)?.value() + bias;
                let (alpha_hat, power_hat) =
                    monte_carlo_rates(&design, trials, &stream.substream(design_index))?;
                design_index += 1;

                let band_alpha = binomial_band(a, trials);
                let band_power = binomial_band(analytic.clamp(0.0, 1.0), trials);
                let alpha_ok = (alpha_hat.value() - a).abs() <= band_alpha;
                let power_ok = (power_hat.value() - analytic).abs() <= band_power;
                checks += 2;
                failures += u64::from(!alpha_ok) + u64::from(!power_ok);

                let _ = writeln!(
                    report,
                    "{:<6} {:<8} {:<5} {:<6} {:<12.6} {:<12.6} {:<12.6} {:<12.6} {:<12.6} {}",
                    e,
                    budget.delta(),
                    d,
                    a,
                    analytic,
                    alpha_hat.value(),
                    power_hat.value(),
                    band_alpha,
                    band_power,
                    if alpha_ok && power_ok { "PASS" } else { "FAIL" }
                );
            }
        }
    }

    let _ = writeln!(
        report,
        "overall: {} ({}/{} checks within 3-sigma bands)",
        if failures == 0 { "PASS" } else { "FAIL" },
        checks - failures,
        checks
    );

    let echo = serde_json::json!({
        "eps": eps,
        "dmu": dmu,
        "alpha_grid": alphas,
        "s": s,
        "delta_rule": delta_rule_echo(rule),
        "trials": trials,
        "calibration_mode": mode.token(),
        "selfcheck_power_bias": bias,
    });
    deliver_report(&report, out.as_deref(), "validate", seed, echo)?;

    if failures > 0 {
        Err(CliError::CheckFailed)
    } else {
        Ok(())
    }
}

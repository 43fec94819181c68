use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use dplab_core::info_bounds::{
    attack_variance_ceiling, mi_first_expansion, mi_second_expansion, nats_to_bits,
    sensitivity_lower_bound, AttackVariance, PopulationStats,
};
use dplab_core::mechanism::Sensitivity;
use dplab_core::Error;

use crate::config::{require_u64, resolve_units, FileConfig, UnitsArg};
use crate::manifest::deliver_report;
use crate::CliError;

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// number of records in the population (>= 1)
    #[arg(long)]
    pub n: Option<u64>,

    /// summed per-record variance (> 0)
    #[arg(long)]
    pub sum_var: Option<f64>,

    /// squared L2 sensitivity of the query (> 0); alternative to --s
    #[arg(long)]
    pub s2: Option<f64>,

    /// L2 sensitivity of the query (> 0); alternative to --s2
    #[arg(long)]
    pub s: Option<f64>,

    /// evaluate the expansions at this attack variance instead of the ceiling
    #[arg(long)]
    pub sigma2_a: Option<f64>,

    /// unit shown first in information lines
    #[arg(long, value_enum)]
    pub units: Option<UnitsArg>,

    /// write the report here instead of stdout (manifest written alongside)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn fmt_info(nats: f64, units: UnitsArg) -> String {
    match units {
        UnitsArg::Nats => format!("{} nats ({} bits)", nats, nats_to_bits(nats)),
        UnitsArg::Bits => format!("{} bits ({} nats)", nats_to_bits(nats), nats),
    }
}

// exp(x) stays a normal f64 for |x| < 700; outside that the linear value is
// only meaningful in the log domain.
fn fmt_log_scale(label: &str, log_value: f64) -> String {
    if log_value.abs() < 700.0 {
        format!("{label} = {} (ln = {log_value})", log_value.exp())
    } else {
        format!("{label}: ln = {log_value} (linear value outside f64 range)")
    }
}

pub fn run(args: BoundsArgs, cfg: &FileConfig, seed: u64) -> Result<(), CliError> {
    let n = require_u64(args.n, cfg.n, "n")?;
    let sum_var = args.sum_var.or(cfg.sum_var).ok_or_else(|| {
        CliError::validation("sum_var", "required: pass the flag or set it in the config file")
    })?;
    let s2_opt = args.s2.or(cfg.s2);
    let s_opt = args.s.or(cfg.s);
    let units = resolve_units(args.units, cfg)?;
    let sigma2_a = args.sigma2_a.or(cfg.sigma2_a);
    let out = args.out.or_else(|| cfg.out.clone());

    let s2 = match (s2_opt, s_opt) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation("s", "give either --s or --s2, not both"))
        }
        (Some(v), None) => v,
        (None, Some(v)) => v * v,
        (None, None) => {
            return Err(CliError::validation("s2", "required: pass --s2 or --s"))
        }
    };
    if !(s2.is_finite() && s2 > 0.0) {
        return Err(CliError::validation(
            "s2",
            format!("must be strictly positive and finite, got {s2}"),
        ));
    }

    let stats = PopulationStats::new(n, sum_var)?;
    let sens = Sensitivity::new(s2.sqrt())?;
    let mi2 = mi_second_expansion(stats, sens)?;

    let mut report = String::new();
    let _ = writeln!(report, "n = {n}");
    let _ = writeln!(report, "sum_var = {sum_var}");
    let _ = writeln!(report, "s = {} (s^2 = {s2})", sens.value());
    let _ = writeln!(report, "mi_second = {}", fmt_info(mi2, units));

    let ceiling = match attack_variance_ceiling(stats, sens) {
        Ok(c) => {
            let _ = writeln!(
                report,
                "attack variance ceiling: {}",
                fmt_log_scale("sigma2_a", c.log_value())
            );
            Some(c)
        }
        Err(Error::InfeasibleBound { .. }) => {
            let _ = writeln!(
                report,
                "attack variance ceiling: unbounded (infeasible constraint)"
            );
            None
        }
        Err(e) => return Err(e.into()),
    };

    // expansions and the recovered sensitivity, evaluated at the requested
    // attack variance or at the ceiling when one exists
    let eval_at = match sigma2_a {
        Some(v) => Some((
            AttackVariance::new(v).map_err(|_| {
                CliError::validation(
                    "sigma2_a",
                    format!("must be strictly positive and finite, got {v}"),
                )
            })?,
            format!("sigma2_a = {v}"),
        )),
        None => ceiling.map(|c| (c, "ceiling".to_string())),
    };

    if let Some((attack, label)) = eval_at {
        let mi1 = mi_first_expansion(stats, attack);
        let _ = writeln!(report, "mi_first at {label}: {}", fmt_info(mi1, units));
        let lower = sensitivity_lower_bound(stats, attack);
        let _ = writeln!(
            report,
            "sensitivity lower bound at {label}: {}",
            fmt_log_scale("s_min", lower.log_value)
        );
    }

    let echo = serde_json::json!({
        "n": n,
        "sum_var": sum_var,
        "s2": s2,
        "sigma2_a": sigma2_a,
        "units": match units { UnitsArg::Nats => "nats", UnitsArg::Bits => "bits" },
    });
    deliver_report(&report, out.as_deref(), "bounds", seed, echo)
}

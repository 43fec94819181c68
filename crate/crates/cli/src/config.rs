//! Optional JSON config file and the flag-over-file resolution helpers.
//! Every field mirrors a flag; explicit flags always win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use dplab_core::mechanism::{CalibrationMode, DeltaRule};

use crate::grid::parse_grid;
use crate::CliError;

/// A numeric grid as it may appear in a config file: a bare number, an
/// explicit array, or the same string syntax the flags accept.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Num(f64),
    List(Vec<f64>),
    Text(String),
}

impl GridSpec {
    pub fn grid(&self, field: &'static str) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::Num(x) => Ok(vec![*x]),
            GridSpec::List(v) => {
                if v.is_empty() {
                    Err(CliError::validation(field, "grid must be nonempty"))
                } else if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    Err(CliError::validation(
                        field,
                        format!("not a finite number: {bad}"),
                    ))
                } else {
                    Ok(v.clone())
                }
            }
            GridSpec::Text(s) => parse_grid(field, s),
        }
    }

    pub fn scalar(&self, field: &'static str) -> Result<f64, CliError> {
        let g = self.grid(field)?;
        if g.len() == 1 {
            Ok(g[0])
        } else {
            Err(CliError::validation(
                field,
                "this command takes a single value, not a grid",
            ))
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eps: Option<GridSpec>,
    pub delta: Option<f64>,
    pub delta_rule: Option<String>,
    pub s: Option<f64>,
    pub s2: Option<f64>,
    pub dmu: Option<GridSpec>,
    pub n: Option<u64>,
    pub sum_var: Option<f64>,
    pub sigma2_a: Option<f64>,
    pub alpha_grid: Option<GridSpec>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub calibration_mode: Option<String>,
    pub units: Option<String>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(p) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(p)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation("config", format!("{}: {e}", p.display())))
}

/// Noise-variance rule selector. `definition3` doubles the log term,
/// sigma_z^2 = 2 s^2 ln(1.25/delta) / eps^2; `theorem1` squares it,
/// sigma_z^2 = s^2 ln(1.25/delta)^2 / eps^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Definition3,
    Theorem1,
}

impl ModeArg {
    pub fn to_mode(self) -> CalibrationMode {
        match self {
            ModeArg::Definition3 => CalibrationMode::Standard,
            ModeArg::Theorem1 => CalibrationMode::LogSquared,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            ModeArg::Definition3 => "definition3",
            ModeArg::Theorem1 => "theorem1",
        }
    }

    fn from_token(field: &'static str, s: &str) -> Result<Self, CliError> {
        match s {
            "definition3" => Ok(ModeArg::Definition3),
            "theorem1" => Ok(ModeArg::Theorem1),
            other => Err(CliError::validation(
                field,
                format!("must be definition3 or theorem1, got {other:?}"),
            )),
        }
    }
}

pub fn resolve_mode(flag: Option<ModeArg>, cfg: &FileConfig) -> Result<ModeArg, CliError> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match &cfg.calibration_mode {
        Some(s) => ModeArg::from_token("calibration_mode", s),
        None => Ok(ModeArg::Definition3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nats,
    Bits,
}

pub fn resolve_units(flag: Option<UnitsArg>, cfg: &FileConfig) -> Result<UnitsArg, CliError> {
    if let Some(u) = flag {
        return Ok(u);
    }
    match cfg.units.as_deref() {
        Some("nats") | None => Ok(UnitsArg::Nats),
        Some("bits") => Ok(UnitsArg::Bits),
        Some(other) => Err(CliError::validation(
            "units",
            format!("must be nats or bits, got {other:?}"),
        )),
    }
}

/// How sweeping commands derive delta from each epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaRuleArg {
    #[value(name = "eps-over-20")]
    EpsOver20,
    #[value(name = "constant")]
    Constant,
}

/// A bare `--delta` selects the constant rule; `--delta-rule eps-over-20`
/// rejects a simultaneous `--delta` rather than silently ignoring it.
pub fn resolve_delta_rule(
    flag_rule: Option<DeltaRuleArg>,
    flag_delta: Option<f64>,
    cfg: &FileConfig,
) -> Result<DeltaRule, CliError> {
    let rule = match (flag_rule, cfg.delta_rule.as_deref()) {
        (Some(r), _) => Some(r),
        (None, Some("eps-over-20")) => Some(DeltaRuleArg::EpsOver20),
        (None, Some("constant")) => Some(DeltaRuleArg::Constant),
        (None, Some(other)) => {
            return Err(CliError::validation(
                "delta_rule",
                format!("must be eps-over-20 or constant, got {other:?}"),
            ))
        }
        (None, None) => None,
    };
    match rule {
        Some(DeltaRuleArg::EpsOver20) => {
            if flag_delta.is_some() {
                Err(CliError::validation(
                    "delta",
                    "conflicts with --delta-rule eps-over-20",
                ))
            } else {
                Ok(DeltaRule::EpsilonOver(20.0))
            }
        }
        Some(DeltaRuleArg::Constant) => flag_delta
            .or(cfg.delta)
            .map(DeltaRule::Constant)
            .ok_or_else(|| {
                CliError::validation("delta", "required when the delta rule is constant")
            }),
        None => match flag_delta {
            Some(d) => Ok(DeltaRule::Constant(d)),
            None => Ok(DeltaRule::EpsilonOver(20.0)),
        },
    }
}

/// Manifest echo of a resolved delta rule.
pub fn delta_rule_echo(rule: DeltaRule) -> serde_json::Value {
    match rule {
        DeltaRule::EpsilonOver(d) => serde_json::json!({ "rule": format!("eps-over-{d}") }),
        DeltaRule::Constant(v) => serde_json::json!({ "rule": "constant", "delta": v }),
    }
}

pub fn require_f64(
    flag: Option<f64>,
    cfg: Option<f64>,
    field: &'static str,
) -> Result<f64, CliError> {
    flag.or(cfg).ok_or_else(|| {
        CliError::validation(field, "required: pass the flag or set it in the config file")
    })
}

pub fn require_u64(
    flag: Option<u64>,
    cfg: Option<u64>,
    field: &'static str,
) -> Result<u64, CliError> {
    flag.or(cfg).ok_or_else(|| {
        CliError::validation(field, "required: pass the flag or set it in the config file")
    })
}

/// Scalar that may come from a grid-typed config entry (e.g. `eps`).
pub fn require_scalar(
    flag: Option<f64>,
    cfg: Option<&GridSpec>,
    field: &'static str,
) -> Result<f64, CliError> {
    match (flag, cfg) {
        (Some(x), _) => Ok(x),
        (None, Some(g)) => g.scalar(field),
        (None, None) => Err(CliError::validation(
            field,
            "required: pass the flag or set it in the config file",
        )),
    }
}

pub fn grid_with_default(
    flag: Option<&str>,
    cfg: Option<&GridSpec>,
    default_spec: &str,
    field: &'static str,
) -> Result<Vec<f64>, CliError> {
    match (flag, cfg) {
        (Some(s), _) => parse_grid(field, s),
        (None, Some(g)) => g.grid(field),
        (None, None) => parse_grid(field, default_spec),
    }
}

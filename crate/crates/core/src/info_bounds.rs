//! Mutual-information bounds linking the adversary's injected-record
//! variance to the mechanism's sensitivity.
//!
//! Two expansions of the information leaked by the noisy release are equated
//! to bound the attack: the first depends on the attack variance, the second
//! on the sensitivity through a (2 pi e)^(n-1) factor. That factor overflows
//! f64 near n = 300, so every quantity here is carried in the natural-log
//! domain; `AttackVariance` stores log(sigma2) for the same reason (ceilings
//! at large n are far below the smallest positive double).

use crate::error::{Error, Result};
use crate::mechanism::{sensitivity_squared_from_noise, NoiseScale, PrivacyBudget, Sensitivity};

fn ln_2pie() -> f64 {
    (std::f64::consts::TAU * std::f64::consts::E).ln()
}

// ln(1 + e^t), stable for t of either sign
fn ln1pexp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

// ln(e^x + e^y)
fn logaddexp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// Dimension and total generative variance of the original dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationStats {
    n: u64,
    sum_var: f64,
}

impl PopulationStats {
    pub fn new(n: u64, sum_var: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", "dataset dimension must be at least 1"));
        }
        if !sum_var.is_finite() || sum_var <= 0.0 {
            return Err(Error::domain(
                "sum_var",
                format!("total variance must be finite and positive, got {sum_var}"),
            ));
        }
        Ok(PopulationStats { n, sum_var })
    }

    pub fn n(self) -> u64 {
        self.n
    }

    pub fn sum_var(self) -> f64 {
        self.sum_var
    }

    fn log_sum_var(self) -> f64 {
        self.sum_var.ln()
    }
}

/// Variance of the adversary's injected record, stored as log(sigma2_xa).
///
/// The invariant sigma2_xa > 0 holds by construction (the log is finite);
/// `value()` exponentiates on demand and may underflow to 0 when the log is
/// very negative, which is why the log form is canonical.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AttackVariance {
    log_sigma2: f64,
}

impl AttackVariance {
    pub fn new(sigma2_xa: f64) -> Result<Self> {
        if !sigma2_xa.is_finite() || sigma2_xa <= 0.0 {
            return Err(Error::domain(
                "sigma2_xa",
                format!("attack variance must be finite and positive, got {sigma2_xa}"),
            ));
        }
        Ok(AttackVariance {
            log_sigma2: sigma2_xa.ln(),
        })
    }

    pub fn from_log(log_sigma2: f64) -> Result<Self> {
        if !log_sigma2.is_finite() {
            return Err(Error::domain(
                "sigma2_xa",
                format!("log attack variance must be finite, got {log_sigma2}"),
            ));
        }
        Ok(AttackVariance { log_sigma2 })
    }

    pub fn log_value(self) -> f64 {
        self.log_sigma2
    }

    pub fn value(self) -> f64 {
        self.log_sigma2.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogContext {
    MutualInformationNats,
    SensitivityLower,
    VarianceCeiling,
}

/// A value whose exponentiation is deferred; `context` says what the
/// exponential would mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuantity {
    pub log_value: f64,
    pub context: LogContext,
}

/// First expansion of the leaked information, driven by the attack variance:
/// 0.5 ln(1 + sum_var / sigma2_xa) nats. Independent of n.
pub fn mi_first_expansion(stats: PopulationStats, attack: AttackVariance) -> f64 {
    0.5 * ln1pexp(stats.log_sum_var() - attack.log_value())
}

/// Second expansion, driven by the sensitivity:
/// 0.5 [(n-1) ln(2 pi e) + ln(sum_var) - 2 ln s] nats.
pub fn mi_second_expansion(stats: PopulationStats, s: Sensitivity) -> Result<f64> {
    if s.value() == 0.0 {
        return Err(Error::domain("s", "sensitivity must be strictly positive"));
    }
    let n1 = (stats.n() - 1) as f64;
    Ok(0.5 * (n1 * ln_2pie() + stats.log_sum_var() - 2.0 * s.value().ln()))
}

/// Smallest sensitivity consistent with the attack variance:
/// s_min^2 = (2 pi e)^(n-1) sum_var sigma2_xa / (sum_var + sigma2_xa),
/// returned as log(s_min).
pub fn sensitivity_lower_bound(stats: PopulationStats, attack: AttackVariance) -> LogQuantity {
    let n1 = (stats.n() - 1) as f64;
    let lsv = stats.log_sum_var();
    let la = attack.log_value();
    let log_s2 = n1 * ln_2pie() + lsv + la - logaddexp(lsv, la);
    LogQuantity {
        log_value: 0.5 * log_s2,
        context: LogContext::SensitivityLower,
    }
}

/// Largest attack variance the information constraint tolerates:
/// sigma2_xa <= sum_var / (E - 1) with E = (2 pi e)^(n-1) sum_var / s^2.
///
/// E <= 1 means the constraint is vacuous; that is reported as
/// `InfeasibleBound` (the ceiling is "unbounded"), never as a garbage value.
pub fn attack_variance_ceiling(stats: PopulationStats, s: Sensitivity) -> Result<AttackVariance> {
    let mi = mi_second_expansion(stats, s)?;
    let l = 2.0 * mi; // ln E
    if l <= 0.0 {
        return Err(Error::InfeasibleBound { mi_nats: mi });
    }
    // ln(E - 1) without forming E: expm1 below the overflow cutoff, and
    // for huge L the correction ln1p(-e^-L) is exactly zero.
    let log_denom = if l < 709.0 { l.exp_m1().ln() } else { l };
    AttackVariance::from_log(stats.log_sum_var() - log_denom)
}

/// Ceiling for a noise scale calibrated to `budget`: converts the noise back
/// to a sensitivity and applies `attack_variance_ceiling`.
pub fn ceiling_from_budget(
    stats: PopulationStats,
    sigma_z: NoiseScale,
    budget: PrivacyBudget,
) -> Result<AttackVariance> {
    let s2 = sensitivity_squared_from_noise(sigma_z, budget);
    let s = Sensitivity::new(s2.sqrt())?;
    attack_variance_ceiling(stats, s)
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

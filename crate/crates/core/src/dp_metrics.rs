//! KL, Renyi, and Chernoff divergences between univariate Gaussians, and the
//! compliance predicates that check a divergence against the budget bound
//! exp(epsilon).
//!
//! Sign convention: Chernoff information is kept nonnegative via
//! C_a = (1 - a) D_a, which reproduces the equal-variance closed form
//! delta_mu^2 / (8 sigma^2) at a = 1/2.

use std::io;

use crate::error::{Error, Result};
use crate::mechanism::{calibrate_noise_with_mode, CalibrationMode, DeltaRule, Sensitivity};

/// A univariate Gaussian N(mu, sigma^2), parameterized by standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    mu: f64,
    sigma: f64,
}

impl GaussianModel {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain("mu", format!("must be finite, got {mu}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::domain(
                "sigma",
                format!("must be finite and positive, got {sigma}"),
            ));
        }
        Ok(GaussianModel { mu, sigma })
    }

    pub fn mu(self) -> f64 {
        self.mu
    }

    pub fn sigma(self) -> f64 {
        self.sigma
    }

    pub fn variance(self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Prior weight a in (0, 1) with complement b = 1 - a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorWeight {
    a: f64,
}

impl PriorWeight {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 || a >= 1.0 {
            return Err(Error::domain(
                "a",
                format!("prior weight must lie inside the open interval (0, 1), got {a}"),
            ));
        }
        Ok(PriorWeight { a })
    }

    pub fn a(self) -> f64 {
        self.a
    }

    pub fn b(self) -> f64 {
        1.0 - self.a
    }
}

/// KL divergence D(f0 || f1):
/// ln(sigma1/sigma0) + sigma0^2/(2 sigma1^2) + (mu1 - mu0)^2/(2 sigma1^2) - 1/2.
pub fn kl_gaussians(f0: GaussianModel, f1: GaussianModel) -> f64 {
    let dmu = f1.mu() - f0.mu();
    (f1.sigma() / f0.sigma()).ln() + f0.variance() / (2.0 * f1.variance())
        + dmu * dmu / (2.0 * f1.variance())
        - 0.5
}

/// Renyi divergence of order a:
/// ln(sigma1/sigma0) + ln(sigma1^2 / sigma*^2) / (2(a-1)) + a dmu^2 / (2 sigma*^2)
/// with the mixed variance sigma*^2 = a sigma1^2 + (1-a) sigma0^2.
pub fn renyi_gaussians(f0: GaussianModel, f1: GaussianModel, prior: PriorWeight) -> f64 {
    let a = prior.a();
    let mixed = a * f1.variance() + prior.b() * f0.variance();
    let dmu = f0.mu() - f1.mu();
    (f1.sigma() / f0.sigma()).ln() + (f1.variance() / mixed).ln() / (2.0 * (a - 1.0))
        + a * dmu * dmu / (2.0 * mixed)
}

/// Chernoff exponent at prior a: C_a = (1 - a) D_a. Nonnegative.
pub fn chernoff_gaussians(f0: GaussianModel, f1: GaussianModel, prior: PriorWeight) -> f64 {
    prior.b() * renyi_gaussians(f0, f1, prior)
}

/// Chernoff information: the exponent maximized over the prior weight.
/// `a_star` is `None` when the distributions coincide (the exponent is
/// identically zero and no maximizer is distinguished).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffInformation {
    pub value: f64,
    pub a_star: Option<f64>,
}

/// Maximize `chernoff_gaussians` over a in (0, 1).
///
/// Equal variances have the closed-form maximizer a* = 1/2 with value
/// dmu^2 / (8 sigma^2); everything else runs a golden-section search
/// (tolerance 1e-10; the exponent is concave in a for Gaussians).
pub fn chernoff_information(f0: GaussianModel, f1: GaussianModel) -> ChernoffInformation {
    if f0 == f1 {
        return ChernoffInformation {
            value: 0.0,
            a_star: None,
        };
    }
    if f0.sigma() == f1.sigma() {
        let dmu = f0.mu() - f1.mu();
        return ChernoffInformation {
            value: dmu * dmu / (8.0 * f0.variance()),
            a_star: Some(0.5),
        };
    }
    let g = |a: f64| chernoff_gaussians(f0, f1, PriorWeight::new(a).expect("interior point"));
    const INVPHI: f64 = 0.6180339887498949; // (sqrt 5 - 1)/2
    let mut lo = 1e-12;
    let mut hi = 1.0 - 1e-12;
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1v = g(x1);
    let mut f2v = g(x2);
    while hi - lo > 1e-10 {
        if f1v < f2v {
            lo = x1;
            x1 = x2;
            f1v = f2v;
            x2 = lo + INVPHI * (hi - lo);
            f2v = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2v = f1v;
            x1 = hi - INVPHI * (hi - lo);
            f1v = g(x1);
        }
    }
    let a_star = 0.5 * (lo + hi);
    ChernoffInformation {
        value: g(a_star),
        a_star: Some(a_star),
    }
}

/// Budget compliance: metric_value <= exp(epsilon), boundary inclusive.
pub fn compliance(metric_value: f64, epsilon: f64) -> bool {
    metric_value <= epsilon.exp()
}

/// All divergences between one pair of models, with compliance verdicts
/// against exp(epsilon). The Chernoff verdict uses the optimized value
/// (the Chernoff information proper), not the fixed-prior exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    pub kl: f64,
    pub renyi_a: f64,
    pub chernoff_a: f64,
    pub chernoff_opt: f64,
    pub a_star: f64,
    pub budget_bound: f64,
    pub kl_complies: bool,
    pub chernoff_complies: bool,
}

pub fn divergence_report(
    f0: GaussianModel,
    f1: GaussianModel,
    prior: PriorWeight,
    epsilon: f64,
) -> Result<DivergenceReport> {
    if f0 == f1 {
        return Err(Error::Degenerate);
    }
    let kl = kl_gaussians(f0, f1);
    let renyi_a = renyi_gaussians(f0, f1, prior);
    let chernoff_a = chernoff_gaussians(f0, f1, prior);
    let info = chernoff_information(f0, f1);
    let a_star = info.a_star.expect("distinct models have a maximizer");
    let budget_bound = epsilon.exp();
    Ok(DivergenceReport {
        kl,
        renyi_a,
        chernoff_a,
        chernoff_opt: info.value,
        a_star,
        budget_bound,
        kl_complies: compliance(kl, epsilon),
        chernoff_complies: compliance(info.value, epsilon),
    })
}

/// One row of the metric-comparison sweep at a given epsilon and impact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub delta: f64,
    pub delta_mu: f64,
    pub kl: f64,
    pub chernoff_half: f64,
    pub bound_exp_eps: f64,
    pub kl_complies: bool,
    pub chernoff_complies: bool,
}

/// Compare KL against the half-prior Chernoff exponent across an epsilon
/// grid. For each epsilon the noise is calibrated at delta = rule(epsilon),
/// and each impact multiplier m contributes a row with delta_mu = m * s.
pub fn divergence_compliance_sweep(
    s: Sensitivity,
    rule: DeltaRule,
    epsilons: &[f64],
    impact_multipliers: &[f64],
    mode: CalibrationMode,
) -> Result<Vec<SweepRow>> {
    if epsilons.is_empty() {
        return Err(Error::domain("eps", "epsilon grid must be nonempty"));
    }
    if impact_multipliers.is_empty() {
        return Err(Error::domain("dmu", "impact grid must be nonempty"));
    }
    let half = PriorWeight::new(0.5)?;
    let mut rows = Vec::with_capacity(epsilons.len() * impact_multipliers.len());
    for &eps in epsilons {
        let budget = rule.budget_for(eps)?;
        let sigma_z = calibrate_noise_with_mode(budget, s, mode)?;
        let f0 = GaussianModel::new(0.0, sigma_z.value())?;
        for &m in impact_multipliers {
            let delta_mu = m * s.value();
            if delta_mu == 0.0 {
                return Err(Error::domain("dmu", "impact must be nonzero"));
            }
            let f1 = GaussianModel::new(delta_mu, sigma_z.value())?;
            let kl = kl_gaussians(f0, f1);
            let chernoff_half = chernoff_gaussians(f0, f1, half);
            rows.push(SweepRow {
                epsilon: eps,
                delta: budget.delta(),
                delta_mu,
                kl,
                chernoff_half,
                bound_exp_eps: eps.exp(),
                kl_complies: compliance(kl, eps),
                chernoff_complies: compliance(chernoff_half, eps),
            });
        }
    }
    Ok(rows)
}

/// Serialize sweep rows with the fixed header
/// `epsilon,delta,delta_mu,kl,chernoff_half,bound_exp_eps,kl_complies,chernoff_complies`.
pub fn write_sweep_csv<W: io::Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(
        w,
        "epsilon,delta,delta_mu,kl,chernoff_half,bound_exp_eps,kl_complies,chernoff_complies"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.epsilon,
            r.delta,
            r.delta_mu,
            r.kl,
            r.chernoff_half,
            r.bound_exp_eps,
            r.kl_complies,
            r.chernoff_complies
        )?;
    }
    Ok(())
}

//! Likelihood-ratio detection of a location shift in the mechanism's noise.
//!
//! The defender observes z = Y - q(X) and tests H0: z ~ N(mu0, sigma_z^2)
//! against H1: z ~ N(mu1, sigma_z^2). The likelihood-ratio threshold k of the
//! best critical region of size alpha reduces, in the z domain, to a single
//! cut k_tilde; the power function and ROC curves follow in closed form, and
//! a blocked Monte Carlo harness cross-checks both empirically.

use std::io;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::NoiseScale;
use crate::stdnorm::{q_function, q_inverse, Probability, RandomStream};

/// The two noise-location hypotheses. `delta_mu = mu1 - mu0` is the attack
/// impact and must be nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisPair {
    mu0: f64,
    mu1: f64,
    sigma_z: NoiseScale,
}

impl HypothesisPair {
    pub fn new(mu0: f64, mu1: f64, sigma_z: NoiseScale) -> Result<Self> {
        if !mu0.is_finite() || !mu1.is_finite() {
            return Err(Error::domain("mu", "hypothesis locations must be finite"));
        }
        if mu0 == mu1 {
            return Err(Error::domain(
                "delta_mu",
                "hypotheses coincide (mu1 = mu0); the likelihood ratio is degenerate",
            ));
        }
        Ok(HypothesisPair { mu0, mu1, sigma_z })
    }

    /// Unbiased-noise convention: mu0 = 0, mu1 = delta_mu.
    pub fn with_impact(delta_mu: f64, sigma_z: NoiseScale) -> Result<Self> {
        HypothesisPair::new(0.0, delta_mu, sigma_z)
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn sigma_z(&self) -> NoiseScale {
        self.sigma_z
    }

    pub fn delta_mu(&self) -> f64 {
        self.mu1 - self.mu0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    AttackDetected,
    NoAttack,
}

fn check_alpha_open(alpha: Probability) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(
            "alpha",
            format!("must lie inside the open interval (0, 1), got {a}"),
        ));
    }
    Ok(a)
}

/// Likelihood-ratio threshold for positive impact:
/// k = exp{(delta_mu/sigma_z) (Q^-1(alpha) - delta_mu/(2 sigma_z))}.
pub fn threshold_k(delta_mu: f64, sigma_z: NoiseScale, alpha: Probability) -> Result<f64> {
    let a = check_alpha_open(alpha)?;
    if delta_mu <= 0.0 {
        return Err(Error::domain(
            "delta_mu",
            "must be strictly positive here; negative impact uses the mirrored threshold",
        ));
    }
    let r = delta_mu / sigma_z.value();
    let q = q_inverse(Probability::new(a)?)?.value();
    Ok((r * (q - 0.5 * r)).exp())
}

/// Mirrored threshold for negative impact, built on Q^-1(1 - alpha):
/// k_bar = exp{(delta_mu/sigma_z) (Q^-1(1 - alpha) - delta_mu/(2 sigma_z))}.
pub fn threshold_k_bar(delta_mu: f64, sigma_z: NoiseScale, alpha: Probability) -> Result<f64> {
    let a = check_alpha_open(alpha)?;
    if delta_mu >= 0.0 {
        return Err(Error::domain(
            "delta_mu",
            "must be strictly negative here; positive impact uses threshold_k",
        ));
    }
    let r = delta_mu / sigma_z.value();
    let q = q_inverse(Probability::new(1.0 - a)?)?.value();
    Ok((r * (q - 0.5 * r)).exp())
}

/// Map a likelihood-ratio threshold into the z domain:
/// k_tilde = sigma_z^2 ln(k)/delta_mu + (mu1 + mu0)/2.
///
/// For mu0 = 0 and k from `threshold_k`, the delta_mu/2 terms cancel and
/// k_tilde reduces to sigma_z * Q^-1(alpha), making the size of the test
/// exactly alpha by construction.
pub fn decision_threshold(mu0: f64, mu1: f64, sigma_z: NoiseScale, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain(
            "k",
            format!("likelihood-ratio threshold must be positive, got {k}"),
        ));
    }
    let delta_mu = mu1 - mu0;
    if delta_mu == 0.0 {
        return Err(Error::domain("delta_mu", "must be nonzero"));
    }
    Ok(sigma_z.variance() * k.ln() / delta_mu + 0.5 * (mu1 + mu0))
}

/// The z-domain decision rule. `detect_above` is true for positive impact.
/// z exactly on the threshold is classified NoAttack, so ties resolve
/// deterministically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule {
    pub k_tilde: f64,
    pub detect_above: bool,
}

impl ThresholdRule {
    pub fn decide(&self, z: f64) -> Decision {
        let detected = if self.detect_above {
            z > self.k_tilde
        } else {
            z < self.k_tilde
        };
        if detected {
            Decision::AttackDetected
        } else {
            Decision::NoAttack
        }
    }
}

/// A fully calibrated detector: hypotheses, size, likelihood-ratio threshold,
/// and its z-domain form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorDesign {
    pair: HypothesisPair,
    alpha: Probability,
    k: f64,
    k_tilde: f64,
}

impl DetectorDesign {
    pub fn new(pair: HypothesisPair, alpha: Probability) -> Result<Self> {
        let delta_mu = pair.delta_mu();
        let k = if delta_mu > 0.0 {
            threshold_k(delta_mu, pair.sigma_z(), alpha)?
        } else {
            threshold_k_bar(delta_mu, pair.sigma_z(), alpha)?
        };
        let k_tilde = decision_threshold(pair.mu0(), pair.mu1(), pair.sigma_z(), k)?;
        Ok(DetectorDesign {
            pair,
            alpha,
            k,
            k_tilde,
        })
    }

    pub fn pair(&self) -> HypothesisPair {
        self.pair
    }

    pub fn alpha(&self) -> Probability {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_tilde(&self) -> f64 {
        self.k_tilde
    }

    pub fn rule(&self) -> ThresholdRule {
        ThresholdRule {
            k_tilde: self.k_tilde,
            detect_above: self.pair.delta_mu() > 0.0,
        }
    }
}

/// Classify one observation under a calibrated design.
pub fn decide(z: f64, design: &DetectorDesign) -> Decision {
    design.rule().decide(z)
}

/// Detection probability beta_bar of the size-alpha test:
/// Q(Q^-1(alpha) - delta_mu/sigma_z) for positive impact,
/// 1 - Q(Q^-1(1 - alpha) - delta_mu/sigma_z) for negative impact.
pub fn power(alpha: Probability, delta_mu: f64, sigma_z: NoiseScale) -> Result<Probability> {
    let a = check_alpha_open(alpha)?;
    if delta_mu == 0.0 {
        return Err(Error::domain(
            "delta_mu",
            "must be nonzero; with no shift the detection rate collapses to alpha (see detection_rate)",
        ));
    }
    let r = delta_mu / sigma_z.value();
    if delta_mu > 0.0 {
        let q = q_inverse(Probability::new(a)?)?.value();
        Probability::new(q_function(q - r).value())
    } else {
        let q = q_inverse(Probability::new(1.0 - a)?)?.value();
        Probability::new(1.0 - q_function(q - r).value())
    }
}

/// `power`, except the degenerate zero-shift case is reported as a flagged
/// value (equal to alpha) instead of an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRate {
    pub value: Probability,
    pub degenerate: bool,
}

pub fn detection_rate(
    alpha: Probability,
    delta_mu: f64,
    sigma_z: NoiseScale,
) -> Result<DetectionRate> {
    check_alpha_open(alpha)?;
    if delta_mu == 0.0 {
        return Ok(DetectionRate {
            value: alpha,
            degenerate: true,
        });
    }
    Ok(DetectionRate {
        value: power(alpha, delta_mu, sigma_z)?,
        degenerate: false,
    })
}

/// Experiment parameters carried with a curve so serialized output is
/// self-describing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocMetadata {
    pub delta_mu: f64,
    pub sigma_z: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub alpha: f64,
    pub beta_bar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub metadata: RocMetadata,
}

/// Evaluate the analytic ROC curve over a strictly increasing alpha grid.
pub fn roc_curve(metadata: RocMetadata, alphas: &[Probability]) -> Result<RocCurve> {
    if alphas.is_empty() {
        return Err(Error::domain("alpha_grid", "must be nonempty"));
    }
    for w in alphas.windows(2) {
        if w[1].value() <= w[0].value() {
            return Err(Error::domain(
                "alpha_grid",
                format!(
                    "must be strictly increasing, got {} after {}",
                    w[1].value(),
                    w[0].value()
                ),
            ));
        }
    }
    let sigma_z = NoiseScale::new(metadata.sigma_z)?;
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let b = power(alpha, metadata.delta_mu, sigma_z)?;
        points.push(RocPoint {
            alpha: alpha.value(),
            beta_bar: b.value(),
        });
    }
    Ok(RocCurve { points, metadata })
}

/// Serialize a curve with the fixed header
/// `alpha,beta_bar,delta_mu,sigma_z,epsilon,delta,s`.
pub fn write_roc_csv<W: io::Write>(mut w: W, curve: &RocCurve) -> io::Result<()> {
    writeln!(w, "alpha,beta_bar,delta_mu,sigma_z,epsilon,delta,s")?;
    let m = &curve.metadata;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.alpha, p.beta_bar, m.delta_mu, m.sigma_z, m.epsilon, m.delta, m.s
        )?;
    }
    Ok(())
}

const MC_BLOCK: u64 = 1 << 16;

/// Fraction of `trials` draws from N(mu, sigma_z^2) that the rule flags.
///
/// Trials are partitioned into fixed-size blocks; block i draws from
/// `stream.substream(i)` and reports an integer hit count. Summing integers
/// makes the result bit-identical for any number of worker threads.
pub fn empirical_rate(
    mu: f64,
    sigma_z: NoiseScale,
    rule: ThresholdRule,
    trials: u64,
    stream: &RandomStream,
) -> Result<Probability> {
    if trials == 0 {
        return Err(Error::domain("trials", "must be at least 1"));
    }
    let blocks = trials.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut s = stream.substream(b);
            let lo = b * MC_BLOCK;
            let hi = ((b + 1) * MC_BLOCK).min(trials);
            let mut h = 0u64;
            for _ in lo..hi {
                let z = mu + sigma_z.value() * s.next_std_normal();
                if rule.decide(z) == Decision::AttackDetected {
                    h += 1;
                }
            }
            h
        })
        .sum();
    Probability::new(hits as f64 / trials as f64)
}

/// Empirical (alpha_hat, beta_bar_hat): false-alarm rate under H0 and
/// detection rate under H1. H0 and H1 use disjoint substreams of `stream`.
pub fn monte_carlo_rates(
    design: &DetectorDesign,
    trials: u64,
    stream: &RandomStream,
) -> Result<(Probability, Probability)> {
    let rule = design.rule();
    let pair = design.pair();
    let alpha_hat = empirical_rate(
        pair.mu0(),
        pair.sigma_z(),
        rule,
        trials,
        &stream.substream(0),
    )?;
    let beta_bar_hat = empirical_rate(
        pair.mu1(),
        pair.sigma_z(),
        rule,
        trials,
        &stream.substream(1),
    )?;
    Ok((alpha_hat, beta_bar_hat))
}

/// Half-width of the 3-sigma binomial band around probability `p` at the
/// given trial count.
pub fn binomial_band(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

//! The Gaussian mechanism over an aggregation query: privacy budget, noise
//! calibration, dataset model, and noisy release.
//!
//! All logarithms are natural; information quantities downstream are in nats.

use std::io;

use crate::error::{Error, Result};
use crate::stdnorm::RandomStream;

/// An (epsilon, delta) privacy budget.
///
/// delta is restricted to (0, 1): the calibration formula only needs
/// delta < 1.25 to keep its logarithm positive, but delta >= 1 has no
/// privacy meaning, so construction rejects it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::domain(
                "epsilon",
                format!("must be a finite positive real, got {epsilon}"),
            ));
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::domain(
                "delta",
                format!("must lie inside the open interval (0, 1), got {delta}"),
            ));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }

    pub fn delta(self) -> f64 {
        self.delta
    }
}

/// L2 global sensitivity of the query, in query-output units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Sensitivity(f64);

impl Sensitivity {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::domain(
                "s",
                format!("must be a finite nonnegative real, got {s}"),
            ));
        }
        Ok(Sensitivity(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Standard deviation of the mechanism's additive Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseScale(f64);

impl NoiseScale {
    pub fn new(sigma_z: f64) -> Result<Self> {
        if !sigma_z.is_finite() || sigma_z <= 0.0 {
            return Err(Error::domain(
                "sigma_z",
                format!("must be a finite positive real, got {sigma_z}"),
            ));
        }
        Ok(NoiseScale(sigma_z))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn variance(self) -> f64 {
        self.0 * self.0
    }
}

/// Which noise-variance rule calibration uses.
///
/// `Standard` is the usual Gaussian-mechanism rule
/// sigma_z^2 = 2 s^2 ln(1.25/delta) / eps^2. `LogSquared` is an alternative
/// that squares the logarithm instead of doubling it,
/// sigma_z^2 = s^2 ln(1.25/delta)^2 / eps^2; it is exposed so experiments
/// can be rerun under either rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CalibrationMode {
    #[default]
    Standard,
    LogSquared,
}

/// How sweeps derive delta from each epsilon on their grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// delta = epsilon / divisor. The conventional sweep setting is
    /// divisor = 20.
    EpsilonOver(f64),
    /// A fixed delta for every epsilon.
    Constant(f64),
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::EpsilonOver(20.0)
    }
}

impl DeltaRule {
    pub fn delta_for(self, epsilon: f64) -> f64 {
        match self {
            DeltaRule::EpsilonOver(d) => epsilon / d,
            DeltaRule::Constant(delta) => delta,
        }
    }

    pub fn budget_for(self, epsilon: f64) -> Result<PrivacyBudget> {
        PrivacyBudget::new(epsilon, self.delta_for(epsilon))
    }
}

/// Calibrate noise for `budget` and sensitivity `s` under the standard rule.
///
/// sigma_z = s * sqrt(2 ln(1.25/delta)) / eps
pub fn calibrate_noise(budget: PrivacyBudget, s: Sensitivity) -> Result<NoiseScale> {
    calibrate_noise_with_mode(budget, s, CalibrationMode::Standard)
}

pub fn calibrate_noise_with_mode(
    budget: PrivacyBudget,
    s: Sensitivity,
    mode: CalibrationMode,
) -> Result<NoiseScale> {
    if s.value() == 0.0 {
        return Err(Error::domain(
            "s",
            "must be strictly positive to calibrate noise",
        ));
    }
    let log_term = (1.25 / budget.delta()).ln();
    let sigma_z = match mode {
        CalibrationMode::Standard => s.value() * (2.0 * log_term).sqrt() / budget.epsilon(),
        CalibrationMode::LogSquared => s.value() * log_term / budget.epsilon(),
    };
    NoiseScale::new(sigma_z)
}

/// Invert the standard calibration: s^2 = sigma_z^2 eps^2 / (2 ln(1.25/delta)).
pub fn sensitivity_squared_from_noise(sigma_z: NoiseScale, budget: PrivacyBudget) -> f64 {
    let log_term = (1.25 / budget.delta()).ln();
    sigma_z.variance() * budget.epsilon() * budget.epsilon() / (2.0 * log_term)
}

/// A dataset of scalar records together with their generative variances.
/// The variances are model parameters (they are not estimable from a single
/// realization), so they travel with the records.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<f64>,
    record_variances: Vec<f64>,
}

impl Dataset {
    pub fn new(records: Vec<f64>, record_variances: Vec<f64>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::domain("records", "dataset must be nonempty"));
        }
        if records.len() != record_variances.len() {
            return Err(Error::domain(
                "record_variances",
                format!(
                    "length {} does not match {} records",
                    record_variances.len(),
                    records.len()
                ),
            ));
        }
        if let Some(v) = record_variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(
                "record_variances",
                format!("all record variances must be finite and positive, got {v}"),
            ));
        }
        if let Some(x) = records.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(
                "records",
                format!("all records must be finite, got {x}"),
            ));
        }
        Ok(Dataset {
            records,
            record_variances,
        })
    }

    /// Parse a one-column CSV with header `value`; the shared generative
    /// variance is supplied out-of-band.
    pub fn from_csv_reader<R: io::Read>(reader: R, record_variance: f64) -> Result<Self> {
        let mut content = String::new();
        let mut reader = io::BufReader::new(reader);
        io::Read::read_to_string(&mut reader, &mut content)
            .map_err(|e| Error::domain("data", format!("unreadable CSV input: {e}")))?;
        let mut lines = content.lines();
        match lines.next().map(str::trim) {
            Some("value") => {}
            other => {
                return Err(Error::domain(
                    "data",
                    format!("expected CSV header `value`, got {other:?}"),
                ))
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let x: f64 = line.parse().map_err(|_| {
                Error::domain("data", format!("row {}: not a number: {line:?}", i + 2))
            })?;
            records.push(x);
        }
        let n = records.len();
        Dataset::new(records, vec![record_variance; n])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[f64] {
        &self.records
    }

    pub fn record_variances(&self) -> &[f64] {
        &self.record_variances
    }

    pub fn sum_variance(&self) -> f64 {
        self.record_variances.iter().sum()
    }
}

/// The aggregation query q(X) = sum of records.
pub fn aggregate_query(data: &Dataset) -> f64 {
    data.records.iter().sum()
}

/// One noisy release Y = q(X) + sigma_z * Z with Z standard normal.
pub fn release(data: &Dataset, noise: NoiseScale, stream: &mut RandomStream) -> f64 {
    aggregate_query(data) + noise.value() * stream.next_std_normal()
}

/// Draw an i.i.d. zero-mean Gaussian dataset of size `n` and per-record
/// variance `sigma2_x`.
pub fn generate_dataset(n: usize, sigma2_x: f64, stream: &mut RandomStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::domain("n", "dataset size must be at least 1"));
    }
    if !sigma2_x.is_finite() || sigma2_x <= 0.0 {
        return Err(Error::domain(
            "sigma2_x",
            format!("record variance must be finite and positive, got {sigma2_x}"),
        ));
    }
    let sd = sigma2_x.sqrt();
    let records = (0..n).map(|_| sd * stream.next_std_normal()).collect();
    Dataset::new(records, vec![sigma2_x; n])
}

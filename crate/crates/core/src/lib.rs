//! Core library for dplab: Gaussian-mechanism privacy calibration,
//! likelihood-ratio attack detection, mutual-information bounds on attack
//! variance, and divergence-based privacy metrics.
//!
//! Module map:
//! - [`stdnorm`]: standard-normal pdf / Q / inverse-Q and seeded sampling.
//! - [`mechanism`]: (epsilon, delta) budget, noise calibration, noisy release.
//! - [`detector`]: likelihood-ratio thresholds, power, ROC, Monte Carlo rates.
//! - [`info_bounds`]: mutual-information expansions and the attack-variance
//!   ceiling, computed in the log domain.
//! - [`dp_metrics`]: KL / Renyi / Chernoff divergences between Gaussians and
//!   the compliance predicates built on them.

pub mod detector;
pub mod dp_metrics;
pub mod error;
pub mod info_bounds;
pub mod mechanism;
pub mod stdnorm;

pub use error::{Error, Result};

use thiserror::Error;

/// Errors surfaced by the numeric modules.
///
/// `Domain` carries the offending field name so callers (the CLI in
/// particular) can emit `error: <field>: <constraint>` lines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field}: {constraint}")]
    Domain {
        field: &'static str,
        constraint: String,
    },

    /// The mutual-information constraint imposes no ceiling: any attack
    /// variance satisfies it. Carries the (non-positive) second-expansion
    /// value in nats for diagnostics.
    #[error("attack variance unbounded: mutual-information constraint is infeasible ({mi_nats} nats <= 0)")]
    InfeasibleBound { mi_nats: f64 },

    /// Both hypotheses (or both divergence arguments) describe the same
    /// distribution, so the requested quantity is undefined.
    #[error("distributions coincide; quantity undefined")]
    Degenerate,
}

impl Error {
    pub fn domain(field: &'static str, constraint: impl Into<String>) -> Self {
        Error::Domain {
            field,
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

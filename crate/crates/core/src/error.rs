//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by model construction, simulation and analytics.
#[derive(Debug, Error)]
pub enum GrowthError {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An estimator was asked to work from too little data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The event count crossed the configured hard cap. Non-explosion holds
    /// for valid kernels, so this indicates a runaway parameterization.
    #[error("explosion guard tripped after {events} events (cap {cap})")]
    ExplosionGuard { events: u64, cap: u64 },

    /// A coupled pair of processes lost the pathwise inclusion, which means
    /// the supplied rates were not actually ordered.
    #[error("coupling inclusion violated: {0}")]
    InclusionViolation(String),

    /// Two routes that must agree (closed form vs quadrature, bracketing)
    /// disagreed beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),

    /// A numerical routine failed to bracket or converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Serialization or file I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}

impl GrowthError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GrowthError::InvalidArgument(msg.into())
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, GrowthError>;

//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by parameter validation and the computational routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor argument violates a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called outside its domain; the message names the
    /// failed constraint.
    #[error("domain error: {0}")]
    Domain(String),

    /// An observed fraction lies outside the feasible range of the model.
    #[error("infeasible observation {observed}: feasible interval is [{lo}, {hi}]")]
    InfeasibleObservation { observed: f64, lo: f64, hi: f64 },

    /// A configured resource cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Two distributions cannot be compared bin by bin.
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    /// The support of the requested distribution is unbounded
    /// (classical regime, `nu = 0`).
    #[error("unbounded support: nu = 0 is the classical regime")]
    UnboundedSupport,
}

//! Error types shared across the toolkit.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The matrix is not positive semi-definite within tolerance, even after
    /// a single jitter pass.
    #[error("matrix is not PSD: min eigenvalue {min_eigenvalue:e} (tolerance -1e-12)")]
    NotPsd { min_eigenvalue: f64 },

    /// An off-diagonal index pair was out of range or on the diagonal.
    #[error("index pair ({i}, {j}) invalid for dimension {dim}")]
    IndexError { i: usize, j: usize, dim: usize },

    /// Two specs that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    /// A parameter violated its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Correlation parameter outside the open interval required by the theorem.
    #[error("rho = {rho} outside (0, 1)")]
    RhoOutOfRange { rho: f64 },

    /// A functional evaluation produced NaN or infinity.
    #[error("non-finite value from {context} at sample index {index}")]
    NonFinite { context: String, index: u64 },

    /// The requested functional has no analytic gradient.
    #[error("functional {0} has no analytic gradient")]
    UnsupportedFunctional(String),

    /// The two specs violate the unit-diagonal assumption required by the check.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// Importance-sampling weights collapsed below the effective-sample-size guard.
    #[error("degenerate importance weights: ESS {ess:.1} < required {required:.1}")]
    DegenerateWeights { ess: f64, required: f64 },

    /// Alternating projection failed to reach feasibility.
    #[error("feasibility projection stalled: residual {residual:e} after {rounds} rounds")]
    ProjectionStalled { residual: f64, rounds: u32 },
}

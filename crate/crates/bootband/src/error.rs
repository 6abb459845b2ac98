use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Kernel weights sum to (numerically) zero: no observations in the support.
    #[error("kernel weights at center {center} sum to {sum:e}; no data in the kernel support")]
    DegenerateWeights { center: f64, sum: f64 },

    /// The reweighted curvature matrix is not positive definite.
    #[error("curvature matrix is not positive definite under the given multipliers")]
    NonPositiveCurvature,

    /// Quantile index outside (0, 1).
    #[error("quantile level must lie strictly inside (0, 1), got {0}")]
    InvalidTau(f64),

    /// Quantile-location fits require nonnegative multipliers.
    #[error("quantile-location models require a nonnegative multiplier scheme")]
    NegativeMultiplier,

    /// Parameter or weight vector of the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Nominal level outside (0, 1).
    #[error("alpha must lie strictly inside (0, 1), got {0}")]
    InvalidAlpha(f64),

    /// The correction grid {j/B} is empty because alpha * B < 1.
    #[error("alpha {alpha} is below the 1/{replicates} resolution of the replicate grid")]
    AlphaBelowResolution { alpha: f64, replicates: usize },

    /// A single replicate index exhausted its redraw budget.
    #[error("replicate {replicate} was rejected {attempts} times by the curvature guard")]
    TooManyRejections { replicate: usize, attempts: usize },

    /// The normalization matrix H^2 of the bias diagnostic is singular.
    #[error("bias normalization matrix H^2 is numerically singular")]
    SingularH2,

    /// Invalid model grid (empty, non-increasing centers, bad tau grid).
    #[error("invalid model grid: {0}")]
    InvalidGrid(String),

    /// Invalid dataset (empty, length mismatch, non-finite values).
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    /// Invalid bandwidth or data-generating parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Quantile-location targets are only defined for a flat mean function.
    #[error("quantile-location targets require a constant mean function")]
    NonConstantQuantileMean,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

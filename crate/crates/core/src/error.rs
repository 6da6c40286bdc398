use thiserror::Error;

/// Errors raised by state construction, cost handling and the eigensolver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClockError {
    #[error("invalid dimension: number of ions must be at least 1")]
    InvalidDimension,

    #[error("expected {expected} amplitudes, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: sum of squared amplitudes is {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude a_{index} = {value} is negative or not finite")]
    InvalidAmplitude { index: usize, value: f64 },

    #[error("unknown cost label `{0}` (expected sin2, abs, abs_sin_half or neg_delta)")]
    UnknownCost(String),

    #[error("unknown state kind `{0}` (expected product, phase, optimal, max_spread or basis)")]
    UnknownStateKind(String),

    #[error("Fourier coefficient w_{index} = {value} violates w_k >= 0")]
    NegativeCoefficient { index: usize, value: f64 },

    #[error("truncation order must be at least 1")]
    InvalidOrder,

    #[error("matrix is not square and symmetric")]
    NotSymmetric,

    #[error("grid of {grid} points is too coarse, need at least {required}")]
    GridTooCoarse { grid: usize, required: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("eigenvector entry {index} = {value:e} has the wrong sign after sign fixing")]
    SignConvention { index: usize, value: f64 },

    #[error("the optimal state needs a cost function")]
    MissingCost,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ClockError>;

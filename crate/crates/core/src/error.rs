use thiserror::Error;

/// Errors shared across the optimizer, inference and problem modules.
#[derive(Debug, Error)]
pub enum OptError {
    /// A hyperparameter or precondition is outside its valid range.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// An input that must be finite is NaN or infinite.
    #[error("non-finite {0}")]
    NonFinite(&'static str),

    /// The inference denominator phi + R is too small for a stable step.
    #[error("degenerate denominator: phi + R = {phi_plus_r:e}")]
    DegenerateDenominator { phi_plus_r: f64 },

    /// The expected-decrease inner product is not positive.
    #[error("phi = {phi:e} is not positive")]
    NonPositivePhi { phi: f64 },

    #[error("need at least 2 per-example losses, got {got}")]
    InsufficientSamples { got: usize },

    #[error("noise mode CLT requires per-example losses")]
    MissingPerExample,

    #[error("empty batch")]
    EmptyBatch,

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    /// Wraps an error with the iteration at which a run failed.
    #[error("at iteration {iter}: {source}")]
    AtIteration {
        iter: usize,
        #[source]
        source: Box<OptError>,
    },
}

pub type Result<T> = std::result::Result<T, OptError>;

impl OptError {
    pub(crate) fn at(self, iter: usize) -> OptError {
        OptError::AtIteration {
            iter,
            source: Box::new(self),
        }
    }
}

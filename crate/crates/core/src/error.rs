use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NetlumpError>;

#[derive(Debug, Error)]
pub enum NetlumpError {
    /// An input violates a documented invariant. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("Simpson quadrature needs an even number of cells >= 2, got {0}")]
    BadCellCount(usize),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("matrix is reducible (nonzero pattern not strongly connected)")]
    Reducible,

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("singular boundary system at time step {step} (t = {time})")]
    SingularSystem { step: usize, time: f64 },

    #[error("profile has nonzero edge mean {mean:e} (must be zero-mean)")]
    NonZeroMean { mean: f64 },

    #[error("upwind run needs {required} steps, above the limit {limit}")]
    StepOverflow { required: u64, limit: u64 },

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl NetlumpError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        NetlumpError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn mismatch(context: impl Into<String>, expected: usize, got: usize) -> Self {
        NetlumpError::DimensionMismatch {
            context: context.into(),
            expected,
            got,
        }
    }

    /// True for errors that stem from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            NetlumpError::Invalid { .. }
                | NetlumpError::DimensionMismatch { .. }
                | NetlumpError::BadCellCount(_)
                | NetlumpError::NonFinite(_)
                | NetlumpError::Reducible
                | NetlumpError::NotStochastic(_)
                | NetlumpError::NonZeroMean { .. }
                | NetlumpError::Config(_)
        )
    }
}

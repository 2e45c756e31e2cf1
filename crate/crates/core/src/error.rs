use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum FracError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported argument range: {0}")]
    UnsupportedRange(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fixed-point iteration did not contract after {iterations} iterations (last change {last_change:.3e})")]
    NonContraction { iterations: usize, last_change: f64 },

    #[error("parameter regime error: {0}")]
    Regime(String),

    #[error("bracketing error: {0}")]
    Bracketing(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FracError {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FracError::Numerical(_) | FracError::NonContraction { .. } | FracError::Bracketing(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, FracError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FracError::Domain(msg.into()))
}

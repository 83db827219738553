use thiserror::Error;

use crate::sets::ParticleConfig;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum JepError {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A custom jump table has no entry for the index set needed by a jump.
    #[error("jump family undefined at index set {0}")]
    MissingFamilyEntry(ParticleConfig),

    /// Probability mass leaking past the height bound exceeded the tolerance.
    #[error("truncation error: row {row} ({state}) leaks {escaped:e} > tolerance {tol:e}")]
    Truncation {
        row: usize,
        state: ParticleConfig,
        escaped: f64,
        tol: f64,
    },

    /// Iterative solve or series summation failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed run configuration or input file.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl JepError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        JepError::Domain(msg.into())
    }

    /// True for failures that stem from the numerics rather than from the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, JepError::Truncation { .. } | JepError::Numerical(_))
    }
}

pub type Result<T, E = JepError> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors surfaced by the library. `Parameter` covers contract violations on
/// inputs; the remaining variants are data- or numerics-driven failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The root equation (or a moment ratio) has no solution because the
    /// projections carry no energy.
    #[error("no signal: {0}")]
    NoSignal(String),

    /// The per-direction variance vanished, so the practical lambda heuristic
    /// is undefined.
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    /// Projector-pair analysis could not classify an eigenvector consistently.
    #[error("projector analysis failed at index {index}: {reason}")]
    Analysis { index: usize, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for parameter/input errors, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Io(_) | Error::Json(_) => 1,
            Error::NoSignal(_)
            | Error::DegenerateDirection(_)
            | Error::Analysis { .. }
            | Error::Numerical(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parameter<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

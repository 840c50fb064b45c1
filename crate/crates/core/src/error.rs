use std::path::PathBuf;

/// Errors produced by the search primitives, oracles and harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("target vector must have at least one component")]
    EmptyTarget,

    #[error("target vector must have at least one non-zero component")]
    ZeroTarget,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value out of floating point range: {0}")]
    Overflow(String),

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("state space too large: {states} states (limit {limit})")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error("cannot write output `{path}`: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than a failure while running.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Output { .. } | Error::SingularSystem(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

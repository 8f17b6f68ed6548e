use thiserror::Error;

/// Errors raised by the estimators and their building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible concurrence slice: c = {c}, no admissible spectrum after {attempts} attempts")]
    InfeasibleSlice { c: f64, attempts: u64 },

    #[error("singular importance weight: {0}")]
    SingularWeight(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 for configuration, 3 for numerical or
    /// infeasibility failures, 4 for unreadable or malformed files.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) | Error::NotImplemented(_) => 2,
            Error::InfeasibleSlice { .. } | Error::SingularWeight(_) | Error::Numerical(_) => 3,
            Error::Format(_) | Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

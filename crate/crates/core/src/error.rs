use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{function} did not converge after {iterations} iterations")]
    NonConvergence {
        function: &'static str,
        iterations: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid level: {0}")]
    InvalidLevel(String),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: i64, len: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

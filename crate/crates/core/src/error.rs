use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input rejected before any computation (shape, range, emptiness).
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that should be a physical state is not one.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Adaptive integration ran out of subdivisions.
    #[error("accuracy error: estimate {estimate:e} with error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// Numerical output violated an invariant that holds exactly in theory.
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Root bracketing failed on the coarse grid.
    #[error("refinement error: {0}")]
    Refinement(String),

    /// Time grid cannot separate adjacent crossings.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Best available estimate carried by an accuracy error.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Error::Accuracy { estimate, .. } => Some(*estimate),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

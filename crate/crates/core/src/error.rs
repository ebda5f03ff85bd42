use crate::padic::{NotSquareKind, PadicError};
use thiserror::Error;

/// Errors surfaced by the geometric layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision failure: {0}")]
    Precision(String),
    #[error("requires {0} extension of the base field")]
    RequiresExtension(NotSquareKind),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("configuration changed under the map: {0}")]
    ConfigurationDrift(String),
    #[error("not a Whittaker configuration: {0}")]
    NotWhittaker(String),
    #[error("polynomial does not split over the field: {0}")]
    NotSplit(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision(_) => 3,
            Error::Unsupported(_) => 4,
            Error::Parse(_) => 1,
            _ => 2,
        }
    }
}

impl From<PadicError> for Error {
    fn from(e: PadicError) -> Self {
        match e {
            PadicError::NotSquare(k) => Error::RequiresExtension(k),
            PadicError::PrecisionLoss(m) => Error::Precision(m),
            PadicError::Parse(m) => Error::Parse(m),
            other => Error::Domain(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

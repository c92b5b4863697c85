use thiserror::Error;

use crate::problem::CheckReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point {value} is not a node of the axis")]
    NotANode { value: f64 },

    #[error("corner mismatch: phi1(0) = {phi1}, psi1(0) = {psi1}")]
    CornerMismatch { phi1: f64, psi1: f64 },

    #[error("data violates the admissibility constraints:\n{0}")]
    DataConstraints(CheckReport),

    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("expression error: {0}")]
    Expression(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

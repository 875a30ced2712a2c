use thiserror::Error;

/// Errors raised by the hypercube toolkit.
///
/// The variants fall into three groups which the command line maps onto
/// distinct exit codes: invalid input, resource limits, and numerical
/// failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HcjError {
    #[error("dimension {n} is outside the supported range 1..={max}")]
    Dimension { n: usize, max: usize },

    #[error("expected {expected} values for n = {n}, got {got}")]
    Length {
        n: usize,
        expected: usize,
        got: usize,
    },

    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("input is not symmetric: level {level} has spread {spread:e}")]
    NotSymmetric { level: usize, spread: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl HcjError {
    /// True for errors caused by the caller's input rather than by limits
    /// or numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            HcjError::Dimension { .. }
                | HcjError::Length { .. }
                | HcjError::NonFinite { .. }
                | HcjError::Parameter(_)
                | HcjError::NotSymmetric { .. }
                | HcjError::Validation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HcjError>;

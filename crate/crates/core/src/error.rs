use thiserror::Error;

/// Errors raised by the completion library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operand shapes disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Non-finite input or a factorization that failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A parameter lies outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! param_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Parameter(format!($($arg)*))
    };
}

macro_rules! dim_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Dimension(format!($($arg)*))
    };
}

macro_rules! num_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Numerical(format!($($arg)*))
    };
}

pub(crate) use {dim_err, num_err, param_err};

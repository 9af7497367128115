use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is numerically singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("oracle enumeration limited to n <= {max}, got n = {n}")]
    OracleGuard { n: usize, max: usize },
    #[error("inconsistent solution: {0}")]
    Inconsistent(String),
    #[error("no invertible column subset found after {attempts} draws")]
    SubmatrixFailure { attempts: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

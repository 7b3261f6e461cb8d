//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    InvalidParameter(String),
    /// A level or dof index outside the valid range.
    IndexOutOfRange { what: &'static str, got: usize, max: usize },
    /// Vector lengths do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Cholesky hit a nonpositive pivot, or CG found a nonpositive curvature
    /// direction: the matrix is not symmetric positive definite.
    NotSpd,
    /// The iterative solver ran out of iterations.
    NoConvergence { iterations: usize, residual: f64 },
    /// The Sherman-Morrison denominator 1 + beta g'B^{-1}g is numerically zero.
    SingularUpdate,
    /// Newton (and the Picard fallback) failed to reach the residual tolerance.
    NewtonFailed { iterations: usize, residual: f64 },
    /// A time-step system lost positive definiteness (e.g. tau_1 too large in
    /// the first-level equation).
    IndefiniteSystem { level: usize },
    /// A step solve failed; carries the time level for context.
    AtLevel { level: usize, source: Box<Error> },
    /// Bad run configuration (file syntax, unknown key, out-of-range value).
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::IndexOutOfRange { what, got, max } => {
                write!(f, "{what} index {got} out of range (max {max})")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NotSpd => write!(f, "matrix is not symmetric positive definite"),
            Error::NoConvergence { iterations, residual } => {
                write!(f, "solver did not converge after {iterations} iterations (residual {residual:.3e})")
            }
            Error::SingularUpdate => write!(f, "rank-one update is singular"),
            Error::NewtonFailed { iterations, residual } => {
                write!(f, "Newton did not converge after {iterations} iterations (residual {residual:.3e})")
            }
            Error::IndefiniteSystem { level } => {
                write!(f, "indefinite system at time level {level}")
            }
            Error::AtLevel { level, source } => write!(f, "at time level {level}: {source}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::AtLevel { source, .. } => Some(source),
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::grid::Staggering;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("staggering mismatch: expected {expected:?}, found {found:?}")]
    StaggeringMismatch {
        expected: Staggering,
        found: Staggering,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("winding constant {winding} is not an integer multiple of L = {length}")]
    InvalidWinding { winding: f64, length: f64 },

    #[error("jet table rows do not follow the Half/Full alternation at row {row}")]
    JetShape { row: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("travelling-wave reduction is singular: |denominator| = {denominator:e}")]
    SingularReduction { denominator: f64 },

    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepSizeUnderflow { s: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at s = {s}")]
    MaxStepsExceeded { max_steps: usize, s: f64 },

    #[error("characteristic relation did not converge at x = {x}, t = {t}")]
    CharacteristicsNoConvergence { x: f64, t: f64 },

    #[error("shooting search failed: {0}")]
    Shooting(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

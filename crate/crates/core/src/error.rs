use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("evaluation failed in segment {segment} at x = {x}: {reason}")]
    Eval { segment: usize, x: f64, reason: String },

    #[error("line {line}: {message}")]
    ProblemFile { line: usize, message: String },

    #[error("{what} must be strictly increasing")]
    NotIncreasing { what: String },

    #[error("p vanishes at x = {x}; the quasi-derivative system is degenerate there")]
    DegeneratePoint { x: f64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("maximum number of steps ({steps}) exceeded at x = {x}")]
    MaxSteps { x: f64, steps: usize },

    #[error("t = {t} lies outside [{lo}, {hi}]")]
    OutOfSpan { t: f64, lo: f64, hi: f64 },

    #[error("x = {x} is within {h} of the coefficient break at {at}")]
    NearBreak { x: f64, h: f64, at: f64 },

    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("found {found} sign changes in the scan range, {wanted} requested")]
    TooFewRoots { found: usize, wanted: usize },

    #[error("{0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

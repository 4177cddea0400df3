use thiserror::Error;

/// Errors raised by grid construction, field algebra and the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("intrinsic dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("grid shape {shape:?} is unusable for n = {n}: {reason}")]
    InvalidShape {
        n: usize,
        shape: Vec<usize>,
        reason: String,
    },
    #[error("exponent p = {0} outside (1, inf)")]
    InvalidExponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("direction is not a unit vector (|x| = {0})")]
    NonUnitDirection(f64),
    #[error("direction has {got} components, expected {expected}")]
    DirectionLength { expected: usize, got: usize },
    #[error("degenerate radial profile: {0}")]
    DegenerateProfile(String),
    #[error("unsupported Sobolev order {0}")]
    UnsupportedOrder(usize),
    #[error("center {center:?} is outside the safe region: {reason}")]
    UnsafeCenter { center: Vec<f64>, reason: String },
    #[error("oscillation {0} >= 1/2, gradient bound is vacuous")]
    OscillationTooLarge(f64),
    #[error("epsilon = {0} outside (0, 1/4)")]
    InvalidEpsilon(f64),
    #[error("delta = {0} must be positive")]
    InvalidDelta(f64),
    #[error("invalid surface spec: {0}")]
    InvalidSpec(String),
    #[error("no convex sample after {0} attempts")]
    ResampleExhausted(usize),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("singular configuration: lambda = {lambda}, s = {s} (lambda*s within tolerance of a nonzero multiple of pi)")]
    SingularLambda { lambda: f64, s: f64 },
    #[error("singular matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("input field is identically zero")]
    ZeroInput,
    #[error("operator {op} cannot act on {input}")]
    IncompatibleOperator { op: &'static str, input: &'static str },
    #[error("need at least 3 time samples, got {0}")]
    TooFewSamples(usize),
    #[error("time samples must be uniformly spaced")]
    NonUniformTimes,
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("polynomial degree {0} exceeds the supported maximum of 4")]
    DegreeOverflow(usize),
    #[error("dense assembly limited to {max} points per axis, got {got}")]
    TooLarge { max: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

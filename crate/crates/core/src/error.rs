use thiserror::Error;

/// Errors raised by the library. Every fallible operation returns this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("exhaustive enumeration over {n} variables exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid term #{term}: {reason}")]
    InvalidTerm { term: usize, reason: String },

    #[error("degree {k} exceeds variable count {n}")]
    DegreeExceedsVars { k: usize, n: usize },

    #[error("block count {k} is smaller than the polynomial degree {degree}")]
    TooFewBlocks { k: usize, degree: usize },

    #[error("degree must be at least {min}, got {k}")]
    DegreeTooSmall { k: usize, min: usize },

    #[error("hypothesis {hypothesis} does not support {mode} mode")]
    InvalidHypothesisMode { hypothesis: String, mode: String },

    #[error("scheme incompatible with polynomial: {0}")]
    SchemeMismatch(String),

    #[error("bias {0} is outside (0, 1/2]")]
    InvalidLambda(f64),

    #[error("polynomial is constant")]
    ConstantPolynomial,

    #[error("variance is zero")]
    ZeroVariance,

    #[error("variance {0} is below 1")]
    VarianceBelowOne(f64),

    #[error("function exceeds 1 in absolute value (value {value} at {witness:?})")]
    NotBounded { witness: Vec<i8>, value: f64 },

    #[error("not a one-block polynomial: {0}")]
    NotOneBlock(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

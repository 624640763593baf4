use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("misuse: {0}")]
    Misuse(&'static str),

    #[error(
        "matrix is not rank one (residual/eigenvalue ratio {ratio:.3e} exceeds {tolerance:.0e})"
    )]
    Degenerate { ratio: f64, tolerance: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("exhaustive search refused: {required} configurations exceed the cap of {cap}")]
    BudgetExceeded { required: f64, cap: u64 },

    #[error("unsupported quantization: {0}")]
    UnsupportedScheme(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

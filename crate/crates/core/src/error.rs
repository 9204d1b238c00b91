use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the estimation pipeline.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular design (condition number {cond:e})")]
    Singular { cond: f64 },

    /// A recursion or simulation exceeded the overflow limit at `index`
    /// (1-based). `partial` holds the values computed before that point;
    /// matrix sequences are flattened column-major, one matrix after another.
    #[error("overflow at term {index}; {} finite values computed", partial.len())]
    Overflow { index: usize, partial: Vec<f64> },

    #[error("no invertible sibling: a root lies on the unit circle (|z| = {modulus})")]
    BoundaryRoot { modulus: f64 },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}

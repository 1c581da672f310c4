//! Test-case generators from the two hardness proofs, each paired with an
//! independent oracle.

pub mod circuit;
pub mod qbf;

pub use circuit::*;
pub use qbf::*;

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

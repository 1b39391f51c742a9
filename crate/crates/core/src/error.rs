use thiserror::Error;

use crate::grid::Boundary;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid must be at least 2x2, got {height}x{width}")]
    InvalidShape { height: usize, width: usize },

    #[error("expected {expected} values for the grid, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("field shapes differ: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("operation requires {expected:?} boundary, got {actual:?}")]
    BoundaryMismatch {
        expected: Boundary,
        actual: Boundary,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} penalty is not supported by the solver: it is nonsmooth and needs a different splitting")]
    UnsupportedPenalty(&'static str),

    #[error("log compression needs nonnegative input, found {0}")]
    NegativeInput(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    reason: impl FnOnce() -> String,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason(),
        })
    }
}

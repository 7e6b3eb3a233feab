use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Errors raised by space construction and the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A descriptor violates a structural invariant.
    #[error("invalid space: {0}")]
    Construction(String),
    /// Vector, matrix or block sizes disagree.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    /// The requested quantity cannot be computed exactly (or at all) for this
    /// kind of space.
    #[error("unsupported: {0}")]
    Capability(String),
    /// A precondition on the arguments does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An operator expected to be an isometry moves the norm of `witness`.
    #[error("not an isometry: norm changes by {deviation:e} at the witness vector")]
    NotIsometry {
        witness: Vec<Complex64>,
        deviation: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn construction(msg: impl Into<String>) -> Error {
    Error::Construction(msg.into())
}

pub(crate) fn capability(msg: impl Into<String>) -> Error {
    Error::Capability(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

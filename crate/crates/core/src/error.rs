//! Error type shared by all library modules.

use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by domain validation, counting guards, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent {0} is not even")]
    OddExponent(u32),

    #[error("exponent {0} is less than 2")]
    SmallExponent(u32),

    #[error("dimension must be at least {min}, got {got}")]
    BadDimension { min: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stretch factor {0} is not positive and finite")]
    BadFactor(f64),

    #[error("stretch factor product {product} deviates from 1 beyond the 1e-9 acceptance tolerance")]
    UnnormalizedFactors { product: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("brute-force guard exceeded: bounding box holds about {estimate} points (limit {limit}); reduce t")]
    GuardExceeded { estimate: u128, limit: u128 },

    #[error("lattice count overflows the exact integer accumulator")]
    CountOverflow,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

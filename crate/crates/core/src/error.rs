//! Error type shared across the crate.

use crate::pattern::Pattern;

/// Errors surfaced by the library API.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A matrix position lies outside `1..=n`.
    #[error("position ({i}, {j}) out of range for dimension {n}")]
    IndexOutOfRange { i: u32, j: u32, n: u32 },

    /// Matrix dimension too small for the requested operation.
    #[error("dimension {n} too small: {reason}")]
    DimensionTooSmall { n: u32, reason: String },

    /// A word operation that requires every letter to occur exactly twice.
    #[error("word {0:?} is not pair-matched")]
    NotPairMatched(String),

    /// Enumeration or assembly beyond the supported word length.
    #[error("length {len} exceeds the supported maximum {max}")]
    LengthCap { len: usize, max: usize },

    /// Malformed word input (empty, non-letter symbols, non-canonical labels).
    #[error("invalid word: {0}")]
    InvalidWord(String),

    /// Malformed monomial input (empty, zero color).
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),

    /// An input sequence does not cover the requested matrix.
    #[error("input sequence for {found} (n = {found_n}) cannot fill a {requested} matrix of dimension {requested_n}")]
    InputMismatch {
        requested: Pattern,
        requested_n: u32,
        found: Pattern,
        found_n: u32,
    },

    /// Operation not defined for this pattern.
    #[error("pattern {pattern} does not support {operation}")]
    Unsupported {
        pattern: Pattern,
        operation: &'static str,
    },

    /// Invalid configuration or argument value.
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

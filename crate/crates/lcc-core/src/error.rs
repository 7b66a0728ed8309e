//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation's stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed data: out-of-range index, duplicate inside an edge,
    /// dimension mismatch. Distinct from a validation *failure*, which is
    /// reported, not raised.
    #[error("structural error: {0}")]
    Structure(String),

    /// A seeded generator could not meet its target within its retry budget.
    #[error("generation failed: {0}")]
    Generation(String),

    /// A desk-scale size cap would be exceeded.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format version {0}")]
    Version(u32),

    /// Arithmetic domain error (zero inverse, entropy argument out of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// A certificate produced internally failed its own re-verification.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

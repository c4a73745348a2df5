//! Error type shared by all spinekit modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live in exterior algebras of different dimension.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    /// An operand has the wrong degree for the requested operation.
    #[error("degree {got} invalid here (expected {expected})")]
    WrongDegree { expected: u32, got: u32 },

    /// A wedge product would exceed the ambient dimension.
    #[error("degree overflow: {degree} exceeds ambient dimension {dim_v}")]
    DegreeOverflow { degree: u32, dim_v: u32 },

    /// Invalid ensemble parameters (odd charge, zero particles, dim > 64, ...).
    #[error("invalid context: {0}")]
    InvalidContext(String),

    /// A moment was requested outside the provider's valid range.
    #[error("moment lookup at absolute power {n} outside valid range [{lo}, {hi}]")]
    MomentRange { n: i64, lo: i64, hi: i64 },

    /// A configured term or size budget was exceeded.
    #[error("budget exceeded in {what} (L={charge}, N={particles}): needs {needed} terms, cap {cap}")]
    BudgetExceeded {
        what: &'static str,
        charge: u32,
        particles: u32,
        needed: u128,
        cap: u128,
    },

    /// A persisted table failed schema or checksum validation.
    #[error("cache invalid: {0}")]
    CacheInvalid(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

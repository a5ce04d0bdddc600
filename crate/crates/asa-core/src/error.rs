//! Library-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Variants are grouped so the CLI can map them to exit codes: configuration
/// mistakes (bad parameter combinations, impossible budgets) versus data and
/// input problems (malformed files, inconsistent datasets).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or parameter combination that can never be valid.
    #[error("config error: {0}")]
    Config(String),

    /// Input data that fails validation.
    #[error("{0}")]
    Validation(String),

    /// Textual model or fact input that could not be parsed.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A time index outside `1..=len`.
    #[error("time index {t} out of range 1..={len}")]
    TimeOutOfRange { t: usize, len: usize },

    /// Exhaustive enumeration would exceed the candidate cap.
    #[error("enumeration of ~{estimate} candidates exceeds the cap of {cap}")]
    EnumerationCap { estimate: u128, cap: u64 },

    /// The synthetic generator could not reach the requested class counts.
    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit code the CLI should use when this error reaches `main`.
    ///
    /// 2 for configuration errors, 1 for everything else (validation,
    /// parse, IO).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::EnumerationCap { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

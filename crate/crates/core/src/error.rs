//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the audit pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input does not match the declared schema (missing column, width mismatch, ...).
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// A cell failed to parse; names the offending row and column.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// A value falls outside the attribute's declared domain.
    #[error("domain error at row {row}, column '{column}': unknown category '{value}'")]
    Domain {
        row: usize,
        column: String,
        value: String,
    },

    /// An operation was called with invalid parameters.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Model fitting failed.
    #[error("fit error: {0}")]
    Fit(String),

    /// Query or feature evaluation failed.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Experiment configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by callers that map failures to exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Param(_) | Error::Config(_) => ErrorClass::Config,
            Error::SchemaMismatch(_)
            | Error::Parse { .. }
            | Error::Domain { .. }
            | Error::Csv(_) => ErrorClass::Data,
            Error::Fit(_) | Error::Eval(_) | Error::Io(_) | Error::Serde(_) => ErrorClass::Runtime,
        }
    }
}

/// Failure classes, ordered by how early in a run they are usually caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Runtime,
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}")]
    Bracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// Non-finite intermediate value or failed numerical procedure.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A score could not be evaluated (log of a nonpositive argument etc).
    #[error("score domain error at period {period}: {message}")]
    ScoreDomain { period: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("estimation failed: {message}")]
    Estimation { message: String, diagnostics: Vec<String> },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Attaches a period index to score domain errors.
    pub fn at_period(self, t: usize) -> Self {
        match self {
            Error::ScoreDomain { message, .. } => Error::ScoreDomain { period: t, message },
            other => other,
        }
    }

    /// Short machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Bracket { .. } => "bracket",
            Error::Numeric(_) => "numeric",
            Error::ScoreDomain { .. } => "score_domain",
            Error::InsufficientData(_) => "insufficient_data",
            Error::DegenerateCovariance(_) => "degenerate_covariance",
            Error::Estimation { .. } => "estimation",
            Error::Validation(_) => "validation",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Process exit status: 2 for data/validation problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Bracket { .. }
            | Error::Numeric(_)
            | Error::DegenerateCovariance(_)
            | Error::Estimation { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by models, generators, detectors, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain a density or transform accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or spec violates a construction invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A configuration document failed validation; `key` names the offending field.
    #[error("invalid config `{key}`: {message}")]
    InvalidConfig { key: String, message: String },

    /// Fitting collapsed onto a degenerate solution (component variance under the floor).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Too few samples for the requested fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A transition matrix is not row-stochastic.
    #[error("non-stochastic matrix: {0}")]
    NonStochasticMatrix(String),

    /// The chain has no unique stationary distribution.
    #[error("no unique stationary distribution: {0}")]
    NoUniqueStationary(String),

    /// A detector was stepped after it already raised an alarm.
    #[error("detector already alarmed at t={0}; state is frozen")]
    StepAfterAlarm(u64),

    /// Mismatched or empty inputs to a pairwise operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Ranking metrics need at least one positive and one negative label.
    #[error("single-class input: {0}")]
    SingleClass(String),

    /// Text input failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// An internal invariant was violated; always a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid_model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    pub fn invalid_config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            message: msg.into(),
        }
    }

    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI contract: 2 parse, 3 numeric/degenerate,
    /// 4 config validation, 5 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io { .. } => 2,
            Error::Domain(_)
            | Error::DegenerateFit(_)
            | Error::InsufficientData(_)
            | Error::NonStochasticMatrix(_)
            | Error::NoUniqueStationary(_)
            | Error::StepAfterAlarm(_)
            | Error::SingleClass(_)
            | Error::InvalidInput(_) => 3,
            Error::InvalidModel(_) | Error::InvalidConfig { .. } => 4,
            Error::Internal(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

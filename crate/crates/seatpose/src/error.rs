//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the seatpose library.
#[derive(Debug, Error)]
pub enum Error {
    /// A tensor or joint-count mismatch between two values that must agree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A recording, chair, or checkpoint file failed structural validation.
    #[error("parse error in {path}: field `{field}`: {reason}")]
    Parse {
        path: String,
        field: &'static str,
        reason: String,
    },

    /// A value fell outside its documented range.
    #[error("range error: {field} = {value} outside [{min}, {max}]")]
    Range {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Tap synchronization could not find three start taps.
    #[error("synchronization failure in {stream} stream: detected {detected} taps, need 3")]
    SyncFailure { stream: &'static str, detected: usize },

    /// A split protocol cannot be built from the given roster.
    #[error("split error: {0}")]
    Split(String),

    /// No near-horizontal point cluster was found in a chair scan.
    #[error("chair is not drapeable: {0}")]
    Undrapeable(String),

    /// Gravity-axis settling did not converge.
    #[error("settle failed after {iterations} iterations: {reason}")]
    SettleFailure { iterations: usize, reason: String },

    /// A sequence was too short for the requested operation.
    #[error("sequence too short: {context} needs {needed} frames, got {got}")]
    TooShort {
        context: &'static str,
        needed: usize,
        got: usize,
    },

    /// Procrustes alignment is undefined for degenerate (collinear) joint sets.
    #[error("alignment degenerate: joints are collinear")]
    AlignmentDegenerate,

    /// Distribution statistics contained NaN or infinity.
    #[error("non-finite statistics in {0}")]
    NonFinite(&'static str),

    /// A model was used before training or loading parameters.
    #[error("model not trained: {0}")]
    Untrained(&'static str),

    /// A required checkpoint is missing for a pipeline stage.
    #[error("missing checkpoint for stage `{stage}`: {path}")]
    MissingCheckpoint { stage: &'static str, path: String },

    /// The training set was empty.
    #[error("empty training set: {0}")]
    EmptyTrainSet(&'static str),

    /// Underlying I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Configuration value rejected.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

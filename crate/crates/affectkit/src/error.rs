//! Crate-wide error type and the exit-code categories the CLI maps errors to.

use std::path::PathBuf;
use thiserror::Error;

/// Coarse error category used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Unreadable or structurally malformed inputs (exit 2).
    Input,
    /// Semantically invalid data or parameters (exit 3).
    Data,
    /// Violated internal invariant, i.e. a bug (exit 4).
    Internal,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Input => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Internal => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorCategory::Input => "input",
            ErrorCategory::Data => "data",
            ErrorCategory::Internal => "internal",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed header: {detail}")]
    MalformedHeader { path: PathBuf, detail: String },
    #[error("{path}:{line}: non-finite value")]
    NonFiniteValue { path: PathBuf, line: usize },
    #[error("{path}: channel file has no data rows")]
    EmptyChannel { path: PathBuf },
    #[error("{path}:{line}: unknown label {label:?} (expected strong/neutral/mistake)")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        label: String,
    },
    #[error("{path}:{line}: negative delay {delay}")]
    NegativeDelay {
        path: PathBuf,
        line: usize,
        delay: f64,
    },
    #[error("session {session_id}: channel spans have no common overlap")]
    NoChannelOverlap { session_id: String },
    #[error("channel {kind} does not cover [{t0}, {t1})")]
    RangeNotCovered { kind: &'static str, t0: f64, t1: f64 },
    #[error("event {event_id}: 60 s pre-window not covered by all required channels")]
    InsufficientCoverage { event_id: String },
    #[error("invalid percentile pair ({lower}, {upper})")]
    InvalidPercentile { lower: f64, upper: f64 },
    #[error("cutoff {cutoff} Hz at or above Nyquist ({nyquist} Hz)")]
    CutoffAboveNyquist { cutoff: f64, nyquist: f64 },
    #[error("{len} samples too short for order-{order} filtering")]
    SequenceTooShort { len: usize, order: usize },
    #[error("event {event_id}: no unique session covers its timestamp")]
    UnknownSession { event_id: String },
    #[error("duplicate event id {event_id}")]
    DuplicateEventId { event_id: String },
    #[error("too few pulse peaks: found {found}, need at least {need}")]
    TooFewPeaks { found: usize, need: usize },
    #[error("feature selection dropped every feature")]
    AllFeaturesDropped,
    #[error("class {label} has {count} rows, need at least {need}")]
    ClassTooSmall { label: u8, count: usize, need: usize },
    #[error("minority class has {count} rows, need more than k={k} for SMOTE")]
    MinorityTooSmall { count: usize, k: usize },
    #[error("empty feature matrix")]
    EmptyMatrix,
    #[error("boosting degenerate at round {round} (weighted error {epsilon})")]
    DegenerateRound { round: usize, epsilon: f64 },
    #[error("feature mismatch: input lacks feature {missing:?} required by the model")]
    FeatureMismatch { missing: String },
    #[error("{path}: model schema version {found}, this build supports {supported}")]
    VersionMismatch {
        path: PathBuf,
        found: u64,
        supported: u64,
    },
    #[error("{path}: corrupt model file: {detail}")]
    CorruptModel { path: PathBuf, detail: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("metric undefined: no positive labels or predictions present")]
    MetricUndefined,
    #[error("non-monotone detection time {t} after {prev}")]
    NonMonotoneTime { t: f64, prev: f64 },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Io { .. } | MalformedHeader { .. } | VersionMismatch { .. } | CorruptModel { .. }
            | Config(_) => ErrorCategory::Input,
            Internal(_) => ErrorCategory::Internal,
            _ => ErrorCategory::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

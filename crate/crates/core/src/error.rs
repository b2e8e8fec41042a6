use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid cutoff: {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },

    #[error("invalid filter spec: {0}")]
    InvalidFilter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate window: {len} samples (need at least 2)")]
    DegenerateWindow { len: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("invalid layer {index} ({kind}): {reason}")]
    InvalidLayer {
        index: usize,
        kind: String,
        reason: String,
    },

    #[error("feature layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("stream {stream} is out of order at index {index}")]
    UnorderedStream { stream: usize, index: usize },

    #[error("no labels")]
    NoLabels,

    #[error("window {start_ts}..{end_ts} crosses a day boundary; split at day boundary first")]
    CrossesDayBoundary { start_ts: i64, end_ts: i64 },

    #[error("expected 7 consecutive days, got {0}")]
    WrongDayCount(usize),

    #[error("days are not consecutive: {0}")]
    NonConsecutiveDays(String),

    #[error("inverted time-of-day range: {start} > {end}")]
    InvertedRange { start: String, end: String },

    #[error("overlapping schedule entries at {0}")]
    OverlappingSchedule(String),

}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn shape(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serde_json reports line 0 for errors not tied to a position
        Error::Parse {
            line: e.line(),
            reason: format!("json: {e}"),
        }
    }
}

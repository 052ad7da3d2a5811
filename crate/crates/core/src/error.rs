use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: cannot parse {text:?} as a rate")]
    MalformedRate { line: usize, text: String },
    #[error("line {line}: negative rate {value}")]
    NegativeRate { line: usize, value: f64 },
    #[error("line {line}: non-finite rate")]
    NonFiniteRate { line: usize },
    #[error("trace has {len} samples (last data row at line {line}), at least {min} required")]
    TraceTooShort { len: usize, min: usize, line: usize },
    #[error("resampling interval {interval_s} s exceeds trace duration {duration_s} s")]
    IntervalTooLong { interval_s: usize, duration_s: usize },
    #[error("series of length {len} is too short for statistics (need at least 3)")]
    SeriesTooShort { len: usize },
    #[error("invalid predictor spec {0:?}")]
    InvalidPredictor(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fit unavailable: {in_window} samples inside the truncation window, {required} required")]
    FitUnavailable { in_window: usize, required: usize },
    #[error("degenerate sample: zero variance inside the truncation window")]
    DegenerateSample,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

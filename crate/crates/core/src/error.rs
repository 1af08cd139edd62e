use thiserror::Error;

/// Errors produced by signal, filter, detection, metric, optimizer, and
/// statistics operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid band: f_low {f_low} Hz must lie strictly below f_high {f_high} Hz")]
    InvalidBand { f_low: f64, f_high: f64 },

    #[error("nyquist violation: f_high {f_high} Hz must lie strictly below fs/2 = {nyquist} Hz")]
    NyquistViolation { f_high: f64, nyquist: f64 },

    #[error("filter design failure: {0}")]
    DesignFailure(String),

    #[error("frequency {0} Hz outside [0, fs/2]")]
    InvalidFrequency(f64),

    #[error("no beats detected: {0}")]
    NoBeatsDetected(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the control toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Bloch vector outside the unit ball (norm {norm})")]
    OutsideBlochBall { norm: f64 },

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("control has {got} amplitudes, problem expects {expected}")]
    IntervalMismatch { expected: usize, got: usize },

    #[error("control duration {got} does not match problem duration {expected}")]
    DurationMismatch { expected: f64, got: f64 },

    #[error("intermediate target unreachable by constant control (degenerate spectrum)")]
    DegenerateSpectrum,

    #[error("accuracy unreachable by constant control within horizon {horizon}")]
    UnreachableByConstantControl { horizon: f64 },

    #[error("accuracy unreachable on grid (best distance {best_distance})")]
    UnreachableOnGrid { best_distance: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

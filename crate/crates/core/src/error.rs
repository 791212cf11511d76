use thiserror::Error;

/// Errors produced anywhere in the imaging pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {frequency} Hz is outside the sampled band [{lo}, {hi}] Hz")]
    FrequencyOutOfRange { frequency: f64, lo: f64, hi: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid dielectric spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}) is not strictly inside the cylinder")]
    PointNotInterior { x: f64, y: f64 },

    #[error("point ({x}, {y}) is not outside the cylinder")]
    PointNotExterior { x: f64, y: f64 },

    #[error("no propagation path between antenna and focal point")]
    NoPath,

    #[error("dataset is incomplete: {missing} of {expected} traces missing")]
    IncompleteDataset { missing: usize, expected: usize },

    #[error("trace does not match the dataset timebase: {0}")]
    TimebaseMismatch(String),

    #[error("frequency {frequency} Hz violates the Nyquist limit {nyquist} Hz")]
    NyquistViolation { frequency: f64, nyquist: f64 },

    #[error("image is degenerate (mean pixel value is zero)")]
    DegenerateImage,

    #[error("ideal profile is identically zero")]
    DegenerateIdeal,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(err: toml::de::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(err: toml::ser::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

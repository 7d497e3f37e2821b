use thiserror::Error;

/// Errors raised by the kernel, transform, spectral, MSD and simulation layers.
///
/// Numerical shortfalls (a tolerance that could not be met before an
/// iteration cap) are *not* errors: those come back as values whose
/// `abs_error` is honestly larger than requested.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid kernel table: {0}")]
    InvalidTable(String),

    #[error("kernel is undefined at t = {t}: table ends at {end} and the tail is unclassified")]
    OutsideTable { t: f64, end: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("model invalid: {0}")]
    ModelInvalid(String),

    #[error("operation requires a {expected} kernel, got {found}")]
    WrongRegime {
        expected: &'static str,
        found: &'static str,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("simulation setup rejected: {0}")]
    Simulation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

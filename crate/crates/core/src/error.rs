use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
///
/// The variants are grouped into the categories the command-line front end
/// maps onto exit codes: [`Error::Parameter`] is a validation failure, the
/// numerical variants are computation failures and [`Error::Io`] covers the
/// filesystem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("computation failed: {0}")]
    Computation(String),

    #[error("amplitude overflow at t = {time}: max |c_n| = {max_amplitude:e}")]
    Overflow { time: f64, max_amplitude: f64 },

    #[error("undefined value: {0}")]
    UndefinedValue(String),

    #[error("root not found after {iterations} iterations (final residual {residual:e})")]
    RootNotFound { iterations: usize, residual: f64 },

    #[error("Newton iteration stalled at Γ = {re}{im:+}i: derivative vanishes")]
    Stalled { re: f64, im: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

/// Coarse error category, used for exit codes and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Computation,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parameter(_) => ErrorKind::Validation,
            Error::Io(_) | Error::Serialization(_) => ErrorKind::Io,
            Error::Computation(_)
            | Error::Overflow { .. }
            | Error::UndefinedValue(_)
            | Error::RootNotFound { .. }
            | Error::Stalled { .. } => ErrorKind::Computation,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

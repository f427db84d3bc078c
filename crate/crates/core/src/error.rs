use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation rejected its input; `field` names the
    /// offending quantity.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("{0}")]
    Domain(String),

    /// The current distribution cannot be integrated as requested.
    #[error("quadrature: {0}")]
    Quadrature(String),

    /// The mean state gain at the calibration angle is too small to divide by.
    #[error("degenerate calibration at {angle_deg} deg: |c| = {magnitude:e}")]
    DegenerateCalibration { angle_deg: f64, magnitude: f64 },

    /// A text file failed to parse; `line` is 1-based.
    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A run configuration document was malformed.
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A sweep row failed; wraps the underlying error with the angle.
    #[error("at {angle_deg} deg: {source}")]
    AtAngle {
        angle_deg: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_angle(angle_deg: f64, source: Error) -> Self {
        Error::AtAngle {
            angle_deg,
            source: Box::new(source),
        }
    }

    /// True for filesystem-level failures, as opposed to invalid input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::AtAngle { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

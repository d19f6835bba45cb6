use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point, ball or measure was used with a space it does not belong to.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The greedy Besicovitch decomposition needed more subfamilies than allowed.
    #[error(
        "subfamily bound exceeded: ball #{ball} (center {center:?}, radius {radius}) needs subfamily {needed}, bound allows {allowed}"
    )]
    SubfamilyBoundExceeded {
        ball: usize,
        center: Vec<f64>,
        radius: f64,
        needed: usize,
        allowed: usize,
    },

    #[error("scene error at {location}: {message}")]
    Scene { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

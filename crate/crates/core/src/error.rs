use std::path::PathBuf;

use thiserror::Error;

use crate::lattice::Site;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid extents must be at least 1x1, got {width}x{height}")]
    InvalidGrid { width: usize, height: usize },

    #[error("site ({}, {}) lies outside the {width}x{height} grid", site.l, site.h)]
    SiteOutOfRange { site: Site, width: usize, height: usize },

    #[error("full occupation space needs {sites} cavities but is limited to {limit}")]
    OracleScale { sites: usize, limit: usize },

    #[error("parameter `{name}` must be finite and strictly positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("operands live on different bases (dimension {expected} vs {found})")]
    BasisMismatch { expected: usize, found: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("trajectory holds no snapshots")]
    EmptyTrajectory,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GiscError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GiscError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("solver diverged at iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("empty band selection: no wavelength in [{lo_nm}, {hi_nm}] nm")]
    Selection { lo_nm: f64, hi_nm: f64 },

    #[error("bad file format: expected magic {expected:?}, found {found:?}")]
    Format { expected: String, found: String },

    #[error("invalid header: {0}")]
    Header(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncation { expected: usize, found: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GiscError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GiscError::Io {
            path: path.into(),
            source,
        }
    }
}

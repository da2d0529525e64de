use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while building, loading or traversing graphs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge endpoint {index} out of range (pair #{pair}, vertex_count {vertex_count})")]
    EndpointOutOfRange {
        pair: usize,
        index: u64,
        vertex_count: u64,
    },

    #[error("{path}:{line}: cannot parse token {token:?}")]
    Parse {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("binary CSR format error in field `{field}`: {reason}")]
    Format { field: &'static str, reason: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error(
        "correctness failure: variant {variant}, source {source_vertex}, vertex {vertex}: got {got}, want {want}"
    )]
    Mismatch {
        variant: String,
        source_vertex: u32,
        vertex: u32,
        got: u32,
        want: u32,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

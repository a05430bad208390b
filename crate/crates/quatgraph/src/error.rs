//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {details}")]
    ShapeMismatch { op: &'static str, details: String },

    #[error("cannot normalize a zero quaternion")]
    ZeroQuaternion,

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("node degree {degree} exceeds max_degree {max_degree}")]
    DegreeOverflow { degree: usize, max_degree: usize },

    #[error("class {class} has only {count} members; at least {min} required for a stratified split")]
    ClassTooSmall {
        class: usize,
        count: usize,
        min: usize,
    },

    #[error("node index {index} out of range for {num_nodes} nodes")]
    NodeIndexOutOfRange { index: usize, num_nodes: usize },

    #[error("loss must be a scalar (1x1), got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },

    #[error("NaN or non-finite gradient in parameter {param} at step {step}; training aborted")]
    NanGradient { param: usize, step: u64 },

    #[error("empty vocabulary: corpus contains no tokens")]
    EmptyVocabulary,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("config/model mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

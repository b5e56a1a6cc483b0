use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShineError {
    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: self-loop on node '{node}'")]
    SelfLoop {
        path: String,
        line: usize,
        node: String,
    },
    #[error("conflicting sentiment signs for pair ({src}, {dst}); rerun with --aggregate to collapse")]
    ConflictingSign { src: String, dst: String },
    #[error("node index {index} out of range (|V| = {n_nodes})")]
    NodeOutOfRange { index: u32, n_nodes: usize },
    #[error("unknown node id '{id}'")]
    UnknownNode { id: String },
    #[error("profile network absent")]
    ProfileAbsent,
    #[error("invalid layer dims {dims:?}: {reason}")]
    InvalidDims { dims: Vec<usize>, reason: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("batch contains an unsigned link ({i}, {j})")]
    UnsignedLink { i: u32, j: u32 },
    #[error("no networks enabled")]
    NoNetworksEnabled,
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },
    #[error("emoticon '{0}' maps to both classes")]
    EmoticonConflict(String),
    #[error("corpus has no {0} tweets")]
    EmptyClass(&'static str),
    #[error("no scorable terms for mention at token {0}")]
    Unscorable(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("model file corrupt: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ShineError>;

impl ShineError {
    /// Exit-code taxonomy for the CLI: 1 usage, 2 data, 3 numeric divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            ShineError::Divergence { .. } => 3,
            ShineError::InvalidConfig(_) | ShineError::InvalidDims { .. } => 1,
            _ => 2,
        }
    }
}

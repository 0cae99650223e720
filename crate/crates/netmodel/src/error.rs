use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("network is disconnected: bus {0} unreachable from the first bus")]
    Disconnected(i64),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("clique {clique:?} is not contained in any extended region set")]
    CliqueCover { clique: Vec<i64> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, NetError>;

pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> NetError {
    NetError::Schema {
        path: path.into(),
        msg: msg.into(),
    }
}

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid digraph: {0}")]
    InvalidDigraph(String),

    #[error("unknown edge id {0}")]
    UnknownEdge(usize),

    #[error("invalid conflict system: {0}")]
    InvalidSystem(String),

    #[error("{op}: instance size {n} exceeds the cap {cap} for exhaustive search")]
    SizeCap { op: &'static str, n: usize, cap: usize },

    #[error("invalid nibble parameters: {0}")]
    NibbleConfig(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({0}, {1}) is outside the model domain")]
    Domain(f64, f64),
    #[error("segment {index} is not future-directed causal")]
    Causality { index: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("sampling produced no nodes: {0}")]
    Sampling(String),
    #[error("graph contains a causal cycle; distances are undefined")]
    Cyclic,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("missing structure: {0}")]
    Structure(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("node {0} lies in none of I+(S), S, I-(S)")]
    Split(usize),
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] causal_lab::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

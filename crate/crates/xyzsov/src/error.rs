use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("genericity violated: {0}")]
    Genericity(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("not an eigenpair: residual {0:e}")]
    NotEigenpair(f64),
    #[error("unknown {kind} `{name}` (available: {available})")]
    Unknown {
        kind: &'static str,
        name: String,
        available: String,
    },
    #[error("resource cap: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

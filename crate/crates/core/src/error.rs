use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A file did not follow its expected row format.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Vector or matrix dimensions are inconsistent.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid configuration or missing resource wiring.
    #[error("configuration error: {0}")]
    Config(String),

    /// Entity annotations violate the annotation contract.
    #[error("annotation error: {0}")]
    Annotation(String),

    /// A record could not be assembled into a model input.
    #[error("encoding error: {0}")]
    Encoding(String),

    /// A non-finite value appeared where a finite one is required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Training diverged or could not proceed.
    #[error("training error: {0}")]
    Training(String),

    /// A referenced record or key does not exist.
    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network `{network}`: {reason}")]
    InvalidNetwork { network: String, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {context}: {detail}")]
    NonFinite { context: String, detail: String },

    #[error("exact enumeration refused: {edges} edges exceeds the cap of {cap}")]
    TooManyEdges { edges: usize, cap: usize },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("undefined multinomial for label {label}: all expected counts are zero and alpha = 0")]
    UndefinedMultinomial { label: usize },

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("duplicate character record `{0}`")]
    DuplicateCharacter(String),

    #[error("optimizer diverged: {0}")]
    Diverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidNetwork { .. } => "E_NETWORK",
            Error::InvalidParams(_) => "E_PARAMS",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::NonFinite { .. } => "E_NONFINITE",
            Error::TooManyEdges { .. } => "E_EDGE_CAP",
            Error::EmptyCorpus(_) => "E_EMPTY",
            Error::UndefinedMultinomial { .. } => "E_MULTINOMIAL",
            Error::Parse { .. } => "E_PARSE",
            Error::DuplicateCharacter(_) => "E_DUPLICATE",
            Error::Diverged(_) => "E_DIVERGED",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

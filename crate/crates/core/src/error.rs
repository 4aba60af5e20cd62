use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient order: {0}")]
    InsufficientOrder(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant `{invariant}` failed: {detail}")]
    Assertion { invariant: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 1 for a failed invariant, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Assertion { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

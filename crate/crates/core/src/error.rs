use thiserror::Error;

/// Errors surfaced by the library. The CLI maps each kind to an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::TooLarge(_) | Error::Json(_) => 2,
            Error::Numerical(_) => 3,
            Error::Resource(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

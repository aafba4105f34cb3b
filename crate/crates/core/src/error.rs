use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("no candidates in domain `{domain}` within radius {radius}")]
    EmptyCandidates { domain: String, radius: usize },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unsupported snapshot format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("session already running")]
    SessionBusy,

    #[error("store is read-only")]
    ReadOnly,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("window over cap: {needed} points needed, cap {cap}")]
    WindowOverCap { needed: usize, cap: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("missing metadata: {0}")]
    MissingMetadata(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("empty region: {0}")]
    EmptyRegion(String),
    #[error("unknown family: {0}")]
    UnknownFamily(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error("trace output: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SdpError>;

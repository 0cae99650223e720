use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("crypto: {0}")]
    Crypto(#[from] phe::PheError),
    #[error("missing message: {0}")]
    Missing(String),
    #[error("unknown key for {0}")]
    UnknownKey(String),
    #[error("decode overflow at {context}: |{value}| exceeds the word range; use a larger key or a smaller factor range")]
    DecodeOverflow { context: String, value: String },
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

impl From<ProtocolError> for admm::AdmmError {
    fn from(e: ProtocolError) -> Self {
        admm::AdmmError::Exchange(e.to_string())
    }
}

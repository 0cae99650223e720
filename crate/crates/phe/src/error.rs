use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PheError {
    #[error("key generation failed: {0}")]
    Generation(String),
    #[error("plaintext out of range: must satisfy 0 <= m < n")]
    Encoding,
    #[error("nonce r is not a unit modulo n")]
    InvalidNonce,
    #[error("ciphertext is not valid under this key: {0}")]
    InvalidCiphertext(String),
    #[error("key mismatch: ciphertext under {found}, expected {expected}")]
    KeyMismatch { expected: String, found: String },
    #[error("scalar multiplier must be a positive integer")]
    ZeroScalar,
    #[error("value {value} exceeds the signed {word_bits}-bit word at scale {scale}")]
    Range { value: f64, scale: u64, word_bits: u32 },
    #[error("key file: {0}")]
    KeyFile(String),
}

pub type Result<T> = std::result::Result<T, PheError>;

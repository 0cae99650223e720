use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("symmetry violation: {0}")]
    Symmetry(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FormError>;

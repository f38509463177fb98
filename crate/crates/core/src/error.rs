use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("non-physical operator: {0}")]
    NonPhysical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

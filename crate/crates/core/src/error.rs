use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial is not nonnegative (minimum sampled value {min:e})")]
    NotNonnegative { min: f64 },

    #[error("no spectral factor: {0}")]
    NoSpectralFactor(String),

    #[error("too many directions: {directions} > {cosets} cosets")]
    TooManyDirections { directions: usize, cosets: usize },

    #[error("direction {index} is the zero vector")]
    ZeroDirection { index: usize },

    #[error("invalid coset representatives: {0}")]
    InvalidCosets(String),

    #[error("shape error: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

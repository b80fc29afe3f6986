use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("undefined for the zero subspace")]
    ZeroSubspace,
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

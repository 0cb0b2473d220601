use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("ensemble needs at least 2 members, got {0}")]
    InvalidEnsemble(usize),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("all particle weights underflowed to zero")]
    DegenerateWeights,

    #[error("weights are not normalized (sum = {0})")]
    InvalidWeights(f64),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

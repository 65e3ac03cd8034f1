//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("invalid compute config: {0}")]
    InvalidConfig(String),

    #[error("eigensolver failed to converge at k = {k}: off-diagonal norm {off} after {sweeps} sweeps")]
    EigensolverStalled { k: f64, off: f64, sweeps: usize },

    #[error("separation {r} is not lattice-allowed for pair {pair}")]
    SeparationNotAllowed { r: f64, pair: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("|J| is non-monotone inside the fit window near R = {0}")]
    NonMonotone(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("system size too small: {0}")]
    InsufficientSize(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code class: 2 validation, 3 numerical, 4 io.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::InvalidConfig(_) | Error::SeparationNotAllowed { .. } => 2,
            Error::EigensolverStalled { .. }
            | Error::Numerical(_)
            | Error::InsufficientData(_)
            | Error::NonMonotone(_)
            | Error::InsufficientSize(_) => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        }
    }
}

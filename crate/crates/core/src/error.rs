use thiserror::Error;

/// Errors raised anywhere in the recovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("weight degeneracy: column {index} has projected norm {norm:e} (P e_i vanishes)")]
    WeightDegeneracy { index: usize, norm: f64 },

    #[error("non-parallel assumption violated: |tau| = {tau} for pair ({i}, {j})")]
    AssumptionViolation { i: usize, j: usize, tau: f64 },

    #[error("theorem violated: {0}")]
    TheoremViolation(String),

    #[error("ambiguous argmax: entries {0} and {1} tie within tolerance")]
    AmbiguousArgmax(usize, usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("image output failed: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

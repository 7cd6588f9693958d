use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite coordinate at position {index}")]
    NonFinite { index: usize },

    #[error("observations must have at least one coordinate")]
    EmptyObservation,

    #[error("pooled sample needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("exact Hamiltonian path requested for N = {n} > {max}")]
    ExactPathTooLarge { n: usize, max: usize },

    #[error("size mismatch: graph over {graph} vertices, labels over {labels}")]
    SizeMismatch { graph: usize, labels: usize },

    #[error("expected {expected} edges, got {got}")]
    EdgeCount { expected: usize, got: usize },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("singular null covariance for S = (S_xx, S_yy): {0}")]
    SingularCovariance(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("statistic {0} has no exact null distribution")]
    UnsupportedStatistic(&'static str),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

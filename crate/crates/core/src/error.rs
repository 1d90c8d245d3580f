use thiserror::Error;

/// Errors produced by the matrix, factorization, classification and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density profile: {0}")]
    InvalidProfile(String),

    #[error("row {row}: no distinct non-empty sample after {retries} retries")]
    RetryBoundExceeded { row: usize, retries: usize },

    #[error("dense {rows}x{cols} matrix exceeds the budget of {budget} elements")]
    DenseBudgetExceeded { rows: usize, cols: usize, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("invalid dataset layout: {0}")]
    DatasetLayout(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("svd did not converge")]
    SvdNoConvergence,

    #[error("training produced a non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("vector has no nonzero entries")]
    EmptyVector,

    #[error("density group {0} has no rows")]
    EmptyGroup(usize),

    #[error("label column {0} is constant over the training rows")]
    ConstantLabelColumn(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

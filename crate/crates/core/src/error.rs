use thiserror::Error;

use crate::graded_space::Block;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gram entry {index} is not positive")]
    NonPositiveGram { index: usize },

    #[error("no closed form for symmetric degree {0} (only 1 and 2)")]
    NoClosedForm(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("operator is not materialized on block {0}")]
    Truncated(Block),

    #[error("incompatible degree shifts: {0}")]
    ShiftMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for group of order {order}")]
    Index { index: usize, order: usize },

    #[error("partition error: {0}")]
    Partition(String),

    #[error("element set is not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("exhaustive search cap exceeded ({needed} > {cap})")]
    SearchCapExceeded { needed: u128, cap: u128 },

    #[error("group too large: {0}")]
    GroupTooLarge(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("indeterminate value: {0}")]
    Indeterminate(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

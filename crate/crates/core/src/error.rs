use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("relation is not a strict order: {0}")]
    Cycle(String),
    #[error("index {index} out of range for size {size}")]
    Index { index: usize, size: usize },
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("shape mismatch")]
    ShapeMismatch,
    #[error("dimension mismatch: host has {host} axes, pattern has {pattern}")]
    DimensionMismatch { host: usize, pattern: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("realizer does not realize the poset")]
    InvalidRealizer,
    #[error("chain of size {len} cannot be cut into pieces of size {low}..={high}")]
    InfeasibleCut { len: usize, low: usize, high: usize },
    #[error("chain partition construction failed: {0}")]
    ConstructionFailed(String),
    #[error("subset is not an antichain: {0} and {1} are comparable")]
    NotAntichain(usize, usize),
    #[error("subset contains an induced copy of the poset")]
    NotPFree,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

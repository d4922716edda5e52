use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("{what} exceeds the enumeration cap of {cap}")]
    Capacity { what: String, cap: usize },
    #[error("point outside hull")]
    OutsideHull,
    #[error("u not achievable")]
    NotAchievable,
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("oracle violation: {0}")]
    OracleViolation(String),
    #[error("invalid rank function: {0}")]
    InvalidRank(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("load grid does not cover {0}")]
    Coverage(String),
    #[error("out of scale: {0}")]
    OutOfScale(String),
    #[error("theorem contradiction: {0}")]
    TheoremContradiction(String),
}

use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elements belong to different groups: {0} vs {1}")]
    GroupMismatch(String, String),

    #[error("invalid group descriptor `{0}`: {1}")]
    BadGroupDescriptor(String, String),

    #[error("invalid sequence descriptor `{0}`: {1}")]
    BadSequenceDescriptor(String, String),

    #[error("group order {order} exceeds the configured limit {limit}")]
    OrderLimitExceeded { order: u128, limit: u64 },

    #[error("sequence length {len} exceeds the configured limit {limit}")]
    LengthLimitExceeded { len: u64, limit: u64 },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("sequence is not zero-sum (sigma = {0})")]
    NotZeroSum(String),

    #[error("support of the sequence is not contained in {0}")]
    SupportNotContained(String),

    #[error("element {0} lies outside the cyclic group generated by {1}")]
    OutsideCyclicSpan(String, String),

    #[error("{0} does not divide {1}")]
    NotDivisible(String, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported group for this operation: {0}")]
    UnsupportedGroup(String),

    #[error("unknown suite or family id `{0}`")]
    UnknownId(String),

    #[error("witness search failed where the underlying result guarantees existence; this is a defect: {0}")]
    WitnessDefect(String),

    #[error("cache entry has stale format version `{0}` (expected `{1}`)")]
    CacheVersion(String, String),

    #[error("cache entry failed its checksum (expected {expected}, found {found})")]
    CacheChecksum { expected: String, found: String },

    #[error("cache entry is malformed: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

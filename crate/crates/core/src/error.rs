//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised while validating parameters, building schemes or verifying them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("exponent table for {0} is empty")]
    EmptyTable(String),

    #[error("missing link {0}")]
    MissingLink(String),

    #[error("singular relay system at slot {slot} (group {group})")]
    SingularSlot { slot: usize, group: usize },

    #[error("stacked basis at {node} is rank deficient: rank {rank} < {cols} columns")]
    RankDeficient { node: String, rank: usize, cols: usize },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("scheme not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced across bounds computation, planning, simulation and
/// verification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("corner index {s} outside 0..={max} for K={k}")]
    InvalidCorner { s: u32, k: u32, max: u32 },

    #[error("caching ratio {0} outside [0, 1]")]
    RatioOutOfRange(String),

    #[error("caching ratio {0} is a corner point; use the corner planner")]
    RatioIsCorner(String),

    #[error("target message {theta} outside 1..={k}")]
    InvalidTarget { theta: u32, k: u32 },

    #[error("instance too large to plan: message length {0} bits")]
    InstanceTooLarge(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("malformed equation: {0}")]
    MalformedEquation(String),

    #[error("bit reference out of range: {0}")]
    IndexOutOfRange(String),

    #[error("answer length mismatch: expected {expected}, got {got}")]
    AnswerLengthMismatch { expected: usize, got: usize },

    #[error("desired bit {index} cannot be resolved: {reason}")]
    Unresolvable { index: u32, reason: String },

    #[error("transcript space of {cells} cells exceeds enumeration budget {budget}")]
    EnumerationBudget { cells: String, budget: u64 },

    #[error("monotonicity witness {0} falls outside [0, 1]")]
    WitnessOutOfRange(String),

    #[error("corner cost does not interpolate with witness {0}")]
    WitnessIdentity(String),

    #[error("plan serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

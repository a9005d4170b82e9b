use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration field violates its constraint.
    #[error("invalid config: `{key}` {constraint}")]
    Validation {
        key: &'static str,
        constraint: &'static str,
    },

    #[error("point coincides with the array position")]
    CoincidentPoint,

    #[error("Zadoff-Chu root {root} is not coprime with length {len}")]
    RootNotCoprime { root: u32, len: u32 },

    #[error("spectrum grid is empty")]
    EmptyGrid,

    #[error("no pilot rounds supplied")]
    NoRounds,

    #[error("round 0 contains no detected paths")]
    NoPaths,

    #[error("channel estimate is zero; cannot form a precoder")]
    ZeroEstimate,

    #[error("empty sample set")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid swarm input: {0}")]
    Swarm(&'static str),
}

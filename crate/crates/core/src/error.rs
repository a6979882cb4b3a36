use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("wolfram code {0} is outside 0..=255")]
    WolframCode(u32),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("state {state} is not below the state count {states}")]
    StateOutOfRange { state: usize, states: usize },

    #[error("state count mismatch: expected {expected}, found {found}")]
    StateCountMismatch { expected: usize, found: usize },

    #[error("word of length {len} is too short (need at least {need})")]
    WordTooShort { len: usize, need: usize },

    #[error("iteration count {t} outside 1..={max}")]
    IterationRange { t: usize, max: usize },

    #[error("{what}: {size} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("invalid operator table: {0}")]
    InvalidOperator(String),

    #[error("rule is not linear for the given operator")]
    NotLinear,

    #[error("rule is not reversible")]
    NotReversible,

    #[error("invasion verdict unknown after {steps} steps (width {width})")]
    UnknownVerdict { steps: usize, width: usize },

    #[error("depth limit {0} reached")]
    DepthLimit(u32),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("simulation search inconclusive: {0} candidate pairs skipped by caps")]
    Inconclusive(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

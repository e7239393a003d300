use crate::surrogate::Mode;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model {id}: coefficient {name} must be positive and finite, got {value}")]
    InvalidCoefficient {
        id: u32,
        name: &'static str,
        value: f64,
    },

    #[error("duplicate model id {0} in coefficient table")]
    DuplicateModel(u32),

    #[error("empty registry")]
    EmptyRegistry,

    #[error("unknown model id {0}")]
    UnknownModel(u32),

    #[error("insufficient samples: segment has {0}, need at least 3")]
    InsufficientSamples(usize),

    #[error("segment temperatures are constant; exponential fit is degenerate")]
    DegenerateSegment,

    #[error("sample times must be strictly increasing (violated at index {0})")]
    NonMonotonicTime(usize),

    #[error("segment must start at t = 0, got t = {0}")]
    SegmentNotRebased(f64),

    #[error("trace contains no samples")]
    EmptyTrace,

    #[error("expected an {expected:?} segment, got {got:?}")]
    ModeMismatch { expected: Mode, got: Mode },

    #[error("fitted coefficient {name} = {value} is not positive; the model structure does not describe this data")]
    NegativeFit { name: &'static str, value: f64 },

    #[error("cannot fit {n} durations in [{lo}, {hi}] minutes to a horizon of {horizon} minutes")]
    HorizonInfeasible {
        n: usize,
        lo: u32,
        hi: u32,
        horizon: u32,
    },

    #[error("test case has no states")]
    EmptyTestCase,

    #[error("crossover point {point} out of range for parents of length {a} and {b}")]
    CrossoverPoint { point: usize, a: usize, b: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("line {line}: {msg}")]
    MalformedRow { line: u64, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

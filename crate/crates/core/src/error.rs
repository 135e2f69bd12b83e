use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{measurements} measurements requested but only {particles} particles are available")]
    TooManyMeasurements { measurements: usize, particles: usize },

    #[error("measurement outcome must be +1 or -1, got {0}")]
    InvalidOutcome(i64),

    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("closed-form correlation needs an even particle number, got N = {0}")]
    OddTotal(usize),

    #[error("partition P = {p} outside the allowed range {min}..={max}")]
    PartitionOutOfRange { p: usize, min: usize, max: usize },

    #[error("detection on a state with no particles")]
    EmptyState,

    #[error("phase estimation needs at least one record")]
    NoRecords,

    #[error("party counts sum to {sum}, expected N = {expected}")]
    CountsMismatch { sum: usize, expected: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the simulator, estimator and harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration count r = {0} must be an odd positive integer")]
    EvenIterations(u64),

    #[error("marked set is degenerate for state simulation (K = {marked}, N = {items})")]
    DegenerateSubspace { marked: u64, items: u64 },

    #[error("dense simulation of N = {items} items exceeds the cap of {cap}")]
    DenseCapExceeded { items: u64, cap: u64 },

    #[error("interval violates rotation preconditions: {0}")]
    RotationPrecondition(String),

    #[error("rotation count {0:e} does not fit in 63 bits")]
    RotationOverflow(f64),

    #[error("counter overflow in {0}")]
    CounterOverflow(&'static str),

    #[error("rough search did not terminate before the iteration count overflowed (t = {0})")]
    RoughSearchExhausted(u32),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

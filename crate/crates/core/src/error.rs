use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("problem dimension must be at least {min}, got {n}")]
    DimensionTooSmall { n: usize, min: usize },

    #[error("jump size k={k} must lie in [1..{n}]")]
    InvalidJumpSize { n: usize, k: usize },

    #[error("mu={mu} is not well-behaved for n={n}: (1 - 2/n)*mu must be an even integer")]
    NotWellBehaved { n: usize, mu: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency index {index} at position {position} exceeds the grid maximum {max}")]
    IndexOutOfGrid { position: usize, index: u32, max: u32 },

    #[error("bit string length {got} does not match dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("n={n} exceeds the exact-oracle limit {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("no process succeeded within {rounds} rounds (total budget {total_budget})")]
    Exhausted { rounds: u32, total_budget: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("record parse error at line {line}: {message}")]
    RecordParse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

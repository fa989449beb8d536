use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PactError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pattern has {size} vertices, limit is {limit}")]
    PatternTooLarge { size: usize, limit: usize },
    #[error("pattern set is not closed under root-preserving subtrees: {0}")]
    NotDownwardClosed(String),
    #[error("urn produced a negative count for type {type_index} ({value})")]
    NegativeCount { type_index: usize, value: f64 },
    #[error("intensity matrix is not diagonalizable")]
    NonDiagonalizable,
    #[error("spectrum condition violated: {0}")]
    Spectrum(String),
    #[error("regime mismatch: {0}")]
    Regime(String),
    #[error("oracle limit exceeded: n = {n}, max = {max}")]
    OracleLimit { n: usize, max: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, PactError>;

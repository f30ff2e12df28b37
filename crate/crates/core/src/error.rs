use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid log-logistic parameters: {0}")]
    InvalidParams(String),
    #[error("invalid interval [{lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityDomain(f64),
    #[error("count must be at least 1")]
    EmptyCount,
    #[error("population needs at least 2 units, got {0}")]
    PopulationTooSmall(usize),
    #[error("population value {0} is not a finite non-negative number")]
    InvalidValue(f64),
    #[error("bound M must be positive, got {0}")]
    NonPositiveBound(f64),
    #[error("concentration measure {0} outside [0, 0.25]")]
    GammaOutOfRange(f64),
    #[error("sample size {n} incompatible with population size {population}")]
    SizeMismatch { n: usize, population: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("value {y} outside [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("alpha {0} outside [0, 1)")]
    AlphaOutOfRange(f64),
    #[error("threshold T = {threshold} must satisfy {lo} < T < {hi}")]
    InvalidThreshold { threshold: f64, lo: f64, hi: f64 },
    #[error("invalid card deck: {0}")]
    InvalidDeck(String),
    #[error("variance component is negative: {0}")]
    NegativeComponent(f64),
    #[error("plug-in alpha needs finite prior mean and variance")]
    MissingPriorMoments,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("raw record retention needs {needed} records, budget is {budget}")]
    ResourceLimit { needed: u64, budget: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },

    #[error("non-positive price {price} at index {index}")]
    NonPositivePrice { index: usize, price: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("timestamps decrease at index {index} ({prev} -> {next})")]
    DecreasingTimestamp { index: usize, prev: f64, next: f64 },

    #[error("frequency {j} outside 1..={max}")]
    FrequencyOutOfRange { j: usize, max: f64 },

    #[error("bin {k} outside 0..{bins}")]
    BinOutOfRange { k: usize, bins: usize },

    #[error("invalid bin grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("squared volatility must be positive, got {0}")]
    NonPositiveVolatility(f64),

    #[error("noise level must be non-negative, got {0}")]
    NegativeNoise(f64),

    #[error("negative argument {0} to the test function")]
    NegativeTestArgument(f64),

    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("degrees of freedom must be positive")]
    ZeroDegreesOfFreedom,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("{context}: line {line}: {message}")]
    Parse { context: String, line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the input data rather than by the caller's parameters.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::TooFewObservations { .. }
                | Error::NonPositivePrice { .. }
                | Error::NonFinite { .. }
                | Error::DecreasingTimestamp { .. }
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain [{lo:?}, {hi:?}]")]
    OutsideDomain {
        point: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {d}: {what} supports {supported}")]
    UnsupportedDimension {
        d: usize,
        what: &'static str,
        supported: &'static str,
    },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("support functions are defined on different sphere nets")]
    MismatchedNets,

    #[error("sampler drew a zero-norm function {attempts} times in a row")]
    SamplingFailed { attempts: usize },

    #[error("k = {k} intervals exceeds the enumeration budget; maximal admissible k is {max}")]
    TooManyIntervals { k: usize, max: usize },

    #[error("tolerance budget violated: sum of alpha^q = {used} exceeds eps^q = {budget}")]
    ToleranceBudget { used: f64, budget: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("cover too large to enumerate: log-cardinality {log_card:.3} exceeds ln({limit})")]
    CoverTooLarge { log_card: f64, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("step function is not nondecreasing at h = {location} ({previous} > {value})")]
    NonMonotone {
        location: f64,
        previous: f64,
        value: f64,
    },

    #[error("the zero function has no finite {0}")]
    ZeroFunction(&'static str),

    #[error("model has infinite or non-positive total mass")]
    InvalidMass,

    #[error("generators {first} and {second} share the position {position:?}")]
    CoincidentGenerators {
        first: usize,
        second: usize,
        position: Vec<f64>,
    },

    #[error("expected dimension {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("m = {m} must exceed the first jump location h1 = {h1}")]
    MeanNotAboveFirstJump { m: f64, h1: f64 },

    #[error("need at least {needed} jumps, found {found}")]
    TooFewJumps { needed: usize, found: usize },

    #[error("no cell qualifies for the volume-weighted estimator")]
    NoQualifyingCells,

    #[error("numerical overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps the error with the name of the component that raised it.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

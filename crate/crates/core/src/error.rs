use thiserror::Error;

/// Errors raised by the construction and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range for family `{family}`")]
    IndexOutOfRange { family: String, index: String },

    #[error("operation not supported by family `{family}`: {what}")]
    Unsupported { family: String, what: String },

    #[error("depth budget {budget} exhausted placing a member around {point}")]
    DepthBudget { budget: u32, point: f64 },

    #[error("endpoint nudging failed after {retries} retries: {context}")]
    NudgeExhausted { retries: u32, context: String },

    #[error("null set has {available} points, {requested} witnesses requested")]
    NotEnoughPoints { available: usize, requested: usize },

    #[error("quadrature did not converge within {panels} panels (estimate {estimate:e})")]
    QuadratureBudget { panels: usize, estimate: f64 },

    #[error("nu search exhausted after {steps} candidates at level {level} (member {member})")]
    NuSearchExhausted {
        level: usize,
        member: usize,
        steps: u64,
    },

    #[error("missing neighbor index for member {member} at level {level}")]
    MissingNeighbor { level: usize, member: usize },

    #[error("witness {witness} is not inside any stored member at level {level}")]
    WitnessNotCovered { witness: f64, level: usize },

    #[error("non-finite summation row {0}")]
    NonFiniteRow(String),

    #[error("breakpoint enumeration exceeds {0} cells")]
    TooManyBreakpoints(usize),

    #[error("empty report")]
    EmptyReport,

    #[error("malformed value: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

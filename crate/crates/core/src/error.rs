use thiserror::Error;

/// Errors raised by the numerical and inferential routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (leading minor {minor} failed)")]
    NotPositiveDefinite { minor: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite function value at stencil point {point:?}")]
    NonFiniteEvaluation { point: Vec<f64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid has zero or non-finite mass")]
    ZeroMass,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("log-density is not finite at x = {x}")]
    NonFiniteDensity { x: f64 },

    #[error("power integral unavailable for this model")]
    IntegralUnavailable,

    #[error("non-finite derivative of the log-density")]
    NonFiniteDerivative,

    #[error("normalizing constant unknown for this model")]
    UnknownNormalizer,

    #[error("optimizer hit the iteration limit ({0})")]
    MaxIterations(usize),

    #[error("score is not finite at theta = {theta:?}")]
    NonFiniteScore { theta: Vec<f64> },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("singular Gamma term at theta = {theta}")]
    SingularGamma { theta: f64 },

    #[error("singular Jacobian at {0:?}")]
    SingularJacobian(Vec<f64>),

    #[error("sampler acceptance rate {rate} below 0.001")]
    ZeroAcceptance { rate: f64 },

    #[error("expansion order {order} unsupported for dimension {dim}")]
    UnsupportedOrder { order: usize, dim: usize },

    #[error("point {value} lies outside the support [{lo}, {hi}]")]
    OutsideSupport { value: f64, lo: f64, hi: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

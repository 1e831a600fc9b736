use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("impossible observation at step {step}: zero likelihood under the model")]
    ImpossibleObservation { step: usize },

    #[error("innovation covariance numerically singular at step {step}")]
    SingularInnovation { step: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("particle collapse at step {step}: every reweighted particle has zero likelihood")]
    ParticleCollapse { step: usize },

    #[error("state space too large for enumeration: {configurations} configurations (limit {limit})")]
    StateSpaceTooLarge { configurations: u128, limit: u128 },

    #[error("degenerate contrast: image is constant")]
    DegenerateContrast,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("unstable time step: dt = {dt} exceeds the explicit-scheme bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("landmark collision at t = {time}: minimum pairwise distance {distance:e}")]
    Collision { time: f64, distance: f64 },

    #[error("insufficient coverage: expected {expected:.1} leaves, at least {required:.1} required")]
    InsufficientCoverage { expected: f64, required: f64 },

    #[error("runaway tree: more than {limit} vertices")]
    RunawayTree { limit: usize },

    #[error("no parse: the yield has zero probability under the grammar")]
    NoParse,

    #[error("zero variance: statistic undefined")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

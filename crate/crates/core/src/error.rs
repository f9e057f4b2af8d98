use thiserror::Error;

/// Errors raised by the dynamics, oracle, analysis and phase modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    /// Every sample has a_k = 0, so the effective data point vanishes.
    #[error("degenerate data: all inputs are zero, the gradient flow is frozen")]
    DegenerateData,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The characteristic time is infinite (y = 0 and P·Q = 0).
    #[error("frozen dynamics: {0}")]
    FrozenDynamics(String),

    /// The closed form needs P > 0; the caller must use the degenerate solver.
    #[error("P = 0: the degenerate solution is required")]
    DegenerateRequired,

    #[error("unsupported activation power beta = {0} for this operation")]
    UnsupportedBeta(u32),

    /// A query left the monotone branch of an antiderivative.
    #[error("branch error: {0}")]
    Branch(String),

    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("phase probe rejected: {0}")]
    ProbeRejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

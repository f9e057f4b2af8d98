//! Exact gradient-flow dynamics of a one-hidden-layer network
//! `f(x) = γ Σ_i u_i (w_i · x)^β` trained on data lying on a line.
//!
//! * [`dynamics`]: p/q coordinates, the closed-form β = 1 solution, the tangent kernel.
//! * [`oracle`]: direct ODE integration, the general-β scalar reduction, conservation audits.
//! * [`analysis`]: layer alignment and norm rescaling.
//! * [`phase`]: scaling-limit phase classification with exact rational exponents.
//!
//! Everything is generic over [`Real`] (`f32`, `f64`); the `*64` aliases fix `f64`.

pub mod analysis;
pub mod dynamics;
pub mod errata;
pub mod error;
pub mod init;
pub mod io;
pub mod model;
pub mod oracle;
pub mod phase;
pub mod scalar;

pub use dynamics::{
    closed_form_params, from_pq, ntk, solve, solve_degenerate, solve_from_state, solve_trajectory, to_pq, ClosedFormParams, PQState,
    SolutionKind, SolveOptions, Trajectory, TrajectorySample,
};
pub use error::{Error, Result};
pub use model::{
    model_output, reduce_dataset, training_loss, EffectiveData, Hyperparams, RawDataset, Reduction, WeightState,
};
pub use scalar::Real;

pub use num_rational::Rational64;

pub type Hyperparams64 = Hyperparams<f64>;
pub type RawDataset64 = RawDataset<f64>;
pub type EffectiveData64 = EffectiveData<f64>;
pub type WeightState64 = WeightState<f64>;
pub type PQState64 = PQState<f64>;
pub type ClosedFormParams64 = ClosedFormParams<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type IntegratorConfig64 = oracle::IntegratorConfig<f64>;

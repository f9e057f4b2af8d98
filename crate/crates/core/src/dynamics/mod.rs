//! Coordinate transform, exact closed-form solution, kernel and loss trajectories.

pub mod closed_form;
pub mod ntk;
pub mod pq;
pub mod trajectory;

pub use closed_form::{
    closed_form_params, pq_at, scale_factor, solve, solve_degenerate, solve_from_state, solve_trajectory,
    ClosedFormParams, SolutionKind, SolveOptions,
};
pub use ntk::ntk;
pub use pq::{from_pq, printed_first_layer, to_pq, PQState};
pub use trajectory::{converged_slope, loss_trajectory, LossPoint, Trajectory, TrajectorySample};

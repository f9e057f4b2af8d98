//! Numerical ground truth: direct integration of the gradient flow, the
//! scalar reduction for general β, and conservation auditing.

pub mod audit;
pub mod flow;
pub mod integrator;
pub mod quad;
pub mod reduced;
pub mod root;

pub use audit::{conservation_audit, ConservationLaw, ConservationReport, LawDrift};
pub use flow::{gradient_flow_rhs, integrate, integrate_at, Integrated};
pub use integrator::{IntegratorConfig, Method};
pub use reduced::{f_integral, f_inverse, integrate_reduced, Antiderivative, ReducedRun};

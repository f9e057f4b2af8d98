//! Scaling limits: stability, kernel versus feature-learning phase, and the
//! exponent δ of weight movement.

pub mod classify;
pub mod exponents;
pub mod probe;
pub mod table;

pub use classify::{
    abc_transform, classify_phase, delta_exponent, force_feature_learning, force_kernel, kernel_margin,
    stability_exponent, stable_learning_rate, Phase, PhaseLabel, PqCase,
};
pub use exponents::ScalingExponents;
pub use probe::{empirical_phase_probe, instantiate, log_log_slope, ProbeConfig, ProbeInit, ProbeRow, ProbeTable};
pub use table::{cell_exponents, reference_phases, table, Block, Scaling, TableCell};

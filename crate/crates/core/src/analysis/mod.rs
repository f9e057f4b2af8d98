//! Layer alignment and norm rescaling along the exact solution.

pub mod alignment;
pub mod rescaling;

pub use alignment::{alignment_direction, empirical_zeta, is_parallel, state_zeta, zeta_of_alpha, AlignmentReport, Direction};
pub use rescaling::{classify_profile, norm_trajectories, norms_at, Profile, RescalingCase, RescalingReport};

//! Trajectory serialization: CSV of per-time scalars and JSON weight dumps.

use std::fmt::Write as _;

use crate::dynamics::trajectory::Trajectory;
use crate::model::WeightState;
use crate::scalar::Real;

pub const TRAJECTORY_HEADER: &str = "t,loss,output,ntk,zeta,u_norm,w_norm";

/// One row per sample; an undefined ζ leaves its cell empty.
pub fn trajectory_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let zeta = s.zeta.map(|z| z.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{},{}", s.t, s.loss, s.output, s.ntk, zeta, s.u_norm, s.w_norm);
    }
    out
}

/// JSON array of `{t, u, W}` objects.
pub fn weights_json<T: Real + serde::Serialize>(states: &[WeightState<T>]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(states)
}

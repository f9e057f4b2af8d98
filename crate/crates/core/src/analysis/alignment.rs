//! Cosine similarity between the second layer and the data-aligned first layer.

use serde::{Deserialize, Serialize};

use crate::dynamics::closed_form::ClosedFormParams;
use crate::dynamics::trajectory::Trajectory;
use crate::scalar::{dot, norm, Real};

/// Relative tolerance for treating `α+` as equal to 1 and an initialization as (anti)parallel.
pub const TIE_TOL: f64 = 1e-12;

/// `ζ = u·w̃ / (||u|| ||w̃||)` with `w̃ = W x / ||x||`; `None` if either norm is zero.
pub fn state_zeta<T: Real>(state: &crate::model::WeightState<T>, x: &[T]) -> Option<T> {
    let xn = norm(x);
    if xn == T::zero() {
        return None;
    }
    let wt: Vec<T> = state.w.iter().map(|row| dot(row, x) / xn).collect();
    let (nu, nw) = (norm(&state.u), norm(&wt));
    if nu == T::zero() || nw == T::zero() {
        return None;
    }
    Some((dot(&state.u, &wt) / (nu * nw)).max(-T::one()).min(T::one()))
}

/// `ζ(α) = (αP − Q/α) / sqrt((αP + Q/α)² − (2S)²)`.
///
/// The squared denominator equals `num² + 4(PQ − S²)`, which is how it is
/// evaluated. For an (anti)parallel initialization `PQ = S²` and ζ is exactly
/// `±1`; if the numerator vanishes there too, its sign is returned.
pub fn zeta_of_alpha<T: Real>(alpha: T, p: T, q: T, s: T) -> T {
    let num = alpha * p - q / alpha;
    let gap = (T::lit(4.0) * (p * q - s * s)).max(T::zero());
    let den2 = num * num + gap;
    if den2 == T::zero() {
        return num.signum();
    }
    (num / den2.sqrt()).max(-T::one()).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport<T> {
    pub zeta0: T,
    pub zeta_inf: T,
    pub direction: Direction,
    /// `None` for P = 0, where ζ is pinned at −1.
    pub alpha_plus: Option<T>,
    #[serde(rename = "S")]
    pub s_stat: T,
    /// `α+` within the tie tolerance of 1.
    pub boundary: bool,
}

/// Whether `4PQ − (2S)² = 0`, i.e. `u` and `w̃` are (anti)parallel for all time.
pub fn is_parallel<T: Real>(p: T, q: T, s: T) -> bool {
    let gap = T::lit(4.0) * (p * q - s * s);
    gap <= T::lit(TIE_TOL) * (p + q) * (p + q)
}

/// Direction of the alignment: ζ increases along training iff `α+ > 1`.
pub fn alignment_direction<T: Real>(params: &ClosedFormParams<T>, s_stat: T) -> AlignmentReport<T> {
    let (p, q) = (params.p_stat, params.q_stat);
    let zeta0 = zeta_of_alpha(T::one(), p, q, s_stat);
    let Some(ap) = params.alpha_plus else {
        return AlignmentReport {
            zeta0,
            zeta_inf: zeta0,
            direction: Direction::Constant,
            alpha_plus: None,
            s_stat,
            boundary: false,
        };
    };
    let boundary = (ap - T::one()).abs() <= T::lit(TIE_TOL);
    let direction = if boundary || is_parallel(p, q, s_stat) {
        Direction::Constant
    } else if ap > T::one() {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    AlignmentReport {
        zeta0,
        zeta_inf: zeta_of_alpha(ap, p, q, s_stat),
        direction,
        alpha_plus: Some(ap),
        s_stat,
        boundary,
    }
}

/// `(t, ζ(t))` computed from the weights of each sample.
pub fn empirical_zeta<T: Real>(traj: &Trajectory<T>) -> Vec<(T, Option<T>)> {
    traj.samples.iter().map(|s| (s.t, s.zeta)).collect()
}

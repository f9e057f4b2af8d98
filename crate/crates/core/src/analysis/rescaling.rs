//! How the layer norms change along training.
//!
//! With `h(α) = αP + Q/α`, the squared norms are
//! `||u||² = d (h − 2S)/(βη_w)` and `||w̃||² = d (h + 2S)/η_u`, so both follow
//! the shape of `h` as α moves from 1 to α+. `h` is convex with its minimum
//! at `α* = √(Q/P)`.

use serde::{Deserialize, Serialize};

use crate::analysis::alignment::TIE_TOL;
use crate::dynamics::closed_form::ClosedFormParams;
use crate::error::{Error, Result};
use crate::model::Hyperparams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Increasing,
    Decreasing,
    DipThenRise,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescalingCase {
    /// Norms grow monotonically.
    Growth,
    /// Norms shrink monotonically.
    Shrink,
    /// Norms shrink, then grow.
    DipThenRise,
    /// `α+ = 1`: nothing moves.
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingReport<T> {
    pub case_id: RescalingCase,
    pub u_norm_profile: Profile,
    pub w_norm_profile: Profile,
    pub alpha_plus: T,
    pub alpha_star: T,
    /// `α+` within the tie tolerance of 1 or of `α*`.
    pub boundary: bool,
    /// `(α, ||u||², ||w̃||²)` on a uniform grid from 1 to α+.
    pub curve: Vec<(T, T, T)>,
}

/// Squared norms `(||u||², ||w̃||²)` at scale factor α.
pub fn norms_at<T: Real>(alpha: T, p: T, q: T, s: T, hp: &Hyperparams<T>) -> (T, T) {
    let h = alpha * p + q / alpha;
    let d = hp.d_t();
    let two_s = s + s;
    (d * (h - two_s) / (hp.beta_t() * hp.eta_w), d * (h + two_s) / hp.eta_u)
}

pub fn norm_trajectories<T: Real>(
    params: &ClosedFormParams<T>,
    s_stat: T,
    hp: &Hyperparams<T>,
) -> Result<RescalingReport<T>> {
    let ap = params.alpha_plus.ok_or(Error::DegenerateRequired)?;
    let (p, q) = (params.p_stat, params.q_stat);
    let alpha_star = (q / p).sqrt();
    let tie = |a: T, b: T| (a - b).abs() <= T::lit(TIE_TOL) * a.abs().max(b.abs()).max(T::one());
    let at_one = tie(ap, T::one());
    let at_star = tie(ap, alpha_star);
    let (lo, hi) = if ap < T::one() { (ap, T::one()) } else { (T::one(), ap) };
    let case_id = if at_one {
        RescalingCase::Unchanged
    } else if alpha_star > lo && alpha_star < hi && !at_star && !tie(alpha_star, T::one()) {
        RescalingCase::DipThenRise
    } else {
        let h = |a: T| a * p + q / a;
        if h(ap) > h(T::one()) {
            RescalingCase::Growth
        } else {
            RescalingCase::Shrink
        }
    };
    let profile = match case_id {
        RescalingCase::Growth => Profile::Increasing,
        RescalingCase::Shrink => Profile::Decreasing,
        RescalingCase::DipThenRise => Profile::DipThenRise,
        RescalingCase::Unchanged => Profile::Constant,
    };
    let n = 64;
    let curve = (0..=n)
        .map(|k| {
            let a = T::one() + (ap - T::one()) * T::from_usize_lossy(k) / T::from_usize_lossy(n);
            let (u2, w2) = norms_at(a, p, q, s_stat, hp);
            (a, u2, w2)
        })
        .collect();
    Ok(RescalingReport {
        case_id,
        u_norm_profile: profile,
        w_norm_profile: profile,
        alpha_plus: ap,
        alpha_star,
        boundary: at_one || at_star,
        curve,
    })
}

/// Shape of a sampled sequence, ignoring changes below `tol`.
pub fn classify_profile<T: Real>(values: &[T], tol: T) -> Profile {
    let (first, last) = match (values.first(), values.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Profile::Constant,
    };
    let (min, max) = values.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max - min <= tol {
        return Profile::Constant;
    }
    let rises = values.windows(2).all(|w| w[1] >= w[0] - tol);
    let falls = values.windows(2).all(|w| w[1] <= w[0] + tol);
    if rises {
        Profile::Increasing
    } else if falls {
        Profile::Decreasing
    } else if min < first - tol && min < last - tol {
        Profile::DipThenRise
    } else {
        // not a shape the flow produces; report by net change
        if last > first {
            Profile::Increasing
        } else {
            Profile::Decreasing
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, q: f64, ap: f64) -> ClosedFormParams<f64> {
        ClosedFormParams {
            p_stat: p,
            q_stat: q,
            t_c: 1.0,
            alpha_plus: Some(ap),
            alpha_minus: Some(-q / (p * ap)),
            coupling: 1.0,
            drive: 0.0,
        }
    }

    #[test]
    fn four_cases() {
        let hp = Hyperparams::linear(1.0, 1.0, 4, 1).unwrap();
        let case = |p, q, ap| norm_trajectories(&params(p, q, ap), 0.0, &hp).unwrap().case_id;
        assert_eq!(case(0.5, 0.5, 3.0), RescalingCase::Growth);
        assert_eq!(case(0.5, 0.5, 0.3), RescalingCase::Growth);
        assert_eq!(case(1.0, 0.25, 0.8), RescalingCase::Shrink);
        assert_eq!(case(0.25, 1.0, 1.5), RescalingCase::Shrink);
        assert_eq!(case(1.0, 0.25, 0.2), RescalingCase::DipThenRise);
        assert_eq!(case(0.25, 1.0, 4.0), RescalingCase::DipThenRise);
        assert_eq!(case(0.25, 1.0, 1.0), RescalingCase::Unchanged);
    }

    #[test]
    fn sampled_profiles() {
        assert_eq!(classify_profile(&[1.0, 2.0, 3.0], 1e-12), Profile::Increasing);
        assert_eq!(classify_profile(&[3.0, 1.0, 2.0], 1e-12), Profile::DipThenRise);
        assert_eq!(classify_profile(&[1.0, 1.0], 1e-12), Profile::Constant);
        assert_eq!(classify_profile(&[2.0, 1.0], 1e-12), Profile::Decreasing);
    }
}

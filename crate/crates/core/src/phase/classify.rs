use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::exponents::{int, ScalingExponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Frozen,
    Unstable,
    Kernel,
    FeatureLearning,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Frozen => "frozen",
            Phase::Unstable => "unstable",
            Phase::Kernel => "kernel",
            Phase::FeatureLearning => "feature_learning",
        }
    }
}

/// Why `P/Q → 1` is taken to hold as κ → ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PqCase {
    /// Width diverges with `u_0` and `w_0` drawn independently.
    #[default]
    InfiniteWidthIndependent,
    /// Finite width, zero initial output.
    ZeroOutputInit,
    /// Finite width with `c_u + c_ηw ≠ c_w + c_ηu`, detected from the exponents.
    RateImbalanceAuto,
    /// No argument for convergence.
    AssumeNotConverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    #[serde(with = "crate::phase::exponents::rational")]
    pub stability_exponent: Rational64,
    #[serde(with = "crate::phase::exponents::rational")]
    pub kernel_margin: Rational64,
    pub pq_ratio_converges: bool,
    pub pq_case: PqCase,
}

fn max_cross(s: &ScalingExponents) -> Rational64 {
    (s.c_eta_w + s.c_u).max(s.c_eta_u + s.c_w)
}

/// `max{2c_γ + c_ηu + c_ηw, 2c_γ + c_d + max{c_ηw + c_u, c_ηu + c_w}}`: zero for
/// a learning limit, negative when frozen, positive when unstable.
pub fn stability_exponent(s: &ScalingExponents) -> Rational64 {
    let two = int(2);
    let rates = two * s.c_gamma + s.c_eta_u + s.c_eta_w;
    let coupled = two * s.c_gamma + s.c_d + max_cross(s);
    rates.max(coupled)
}

/// `c_d + max{c_ηw + c_u, c_ηu + c_w} − c_ηu − c_ηw`; the kernel phase needs it positive.
pub fn kernel_margin(s: &ScalingExponents) -> Rational64 {
    s.c_d + max_cross(s) - s.c_eta_u - s.c_eta_w
}

fn pq_converges(s: &ScalingExponents, case: PqCase) -> bool {
    let zero = int(0);
    match case {
        PqCase::InfiniteWidthIndependent => s.c_d > zero,
        PqCase::ZeroOutputInit => true,
        PqCase::RateImbalanceAuto => {
            if s.c_d > zero {
                true
            } else {
                s.c_d == zero && s.c_u + s.c_eta_w != s.c_w + s.c_eta_u
            }
        }
        PqCase::AssumeNotConverging => false,
    }
}

pub fn classify_phase(s: &ScalingExponents, pq_case: PqCase) -> PhaseLabel {
    let stab = stability_exponent(s);
    let margin = kernel_margin(s);
    let converges = pq_converges(s, pq_case);
    let zero = int(0);
    let phase = if stab < zero {
        Phase::Frozen
    } else if stab > zero {
        Phase::Unstable
    } else if margin > zero && converges {
        Phase::Kernel
    } else {
        Phase::FeatureLearning
    };
    PhaseLabel { phase, stability_exponent: stab, kernel_margin: margin, pq_ratio_converges: converges, pq_case }
}

/// Equal-rate exponent `min{−c_γ, −2c_γ − c_d − max{c_u, c_w}}` that makes the
/// tuple stable; the rate exponents of `s` are ignored.
pub fn stable_learning_rate(s: &ScalingExponents) -> Rational64 {
    let two = int(2);
    (-s.c_gamma).min(-two * s.c_gamma - s.c_d - s.c_u.max(s.c_w))
}

/// `(c_η, c_γ)` with `c_η = c_d + max{c_u, c_w}` and `c_γ = −c_η`, the smallest
/// choice that lands in the feature-learning phase.
pub fn force_feature_learning(c_u: Rational64, c_w: Rational64, c_d: Rational64) -> (Rational64, Rational64) {
    let c_eta = c_d + c_u.max(c_w);
    (c_eta, -c_eta)
}

/// `(c_η, c_γ)` with `c_γ = −(c_d + max{c_u, c_w} + c_η)/2`. `c_η` defaults to
/// one unit below `c_d + max{c_u, c_w}` and must stay strictly below it.
pub fn force_kernel(
    c_u: Rational64,
    c_w: Rational64,
    c_d: Rational64,
    c_eta: Option<Rational64>,
) -> Result<(Rational64, Rational64)> {
    let bound = c_d + c_u.max(c_w);
    let c_eta = c_eta.unwrap_or(bound - int(1));
    if c_eta >= bound {
        return Err(Error::InvalidHyperparams(format!(
            "kernel scaling needs c_eta < c_d + max(c_u, c_w) = {bound}, got {c_eta}"
        )));
    }
    Ok((c_eta, -(bound + c_eta) / int(2)))
}

/// Predicted exponent δ of `||W − W_0||/||W_0|| ∝ κ^{−δ}`; `None` for frozen or
/// unstable tuples.
pub fn delta_exponent(s: &ScalingExponents, label: &PhaseLabel) -> Option<Rational64> {
    match label.phase {
        Phase::FeatureLearning => Some(int(0)),
        Phase::Kernel => {
            let e = -(int(2) * s.c_gamma + s.c_eta_u + s.c_eta_w);
            Some(if s.c_u == s.c_w { e / int(2) } else { e })
        }
        Phase::Frozen | Phase::Unstable => None,
    }
}

/// Rescales both layers by `κ^θ`, the output scale by `κ^{−2θ}` and the rates
/// by `κ^{2θ}`. The dynamics, and so the phase, are unchanged. The variance
/// exponents `c_u`, `c_w` move by `2θ`.
pub fn abc_transform(s: &ScalingExponents, theta: Rational64) -> ScalingExponents {
    let two = int(2);
    ScalingExponents {
        c_d: s.c_d,
        c_gamma: s.c_gamma - two * theta,
        c_u: s.c_u + two * theta,
        c_w: s.c_w + two * theta,
        c_eta_u: s.c_eta_u + two * theta,
        c_eta_w: s.c_eta_w + two * theta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::exponents::r;

    fn tuple(cd: i64, cg: Rational64, cu: i64, cw: i64, ce: i64) -> ScalingExponents {
        ScalingExponents::equal_rates(int(cd), cg, int(cu), int(cw), int(ce))
    }

    #[test]
    fn stability_examples() {
        assert_eq!(stability_exponent(&tuple(1, int(-1), 0, 0, 0)), int(-1));
        assert_eq!(stability_exponent(&tuple(1, int(0), -1, 0, 0)), int(1));
        assert_eq!(stability_exponent(&tuple(0, int(0), 0, 0, 0)), int(0));
    }

    #[test]
    fn classification_examples() {
        let ind = PqCase::InfiniteWidthIndependent;
        assert_eq!(classify_phase(&tuple(1, r(-1, 2), 0, 0, 0), ind).phase, Phase::Kernel);
        assert_eq!(classify_phase(&tuple(1, int(0), -1, -1, 0), ind).phase, Phase::FeatureLearning);
        let lazy = tuple(0, int(1), 0, 0, -2);
        assert_eq!(classify_phase(&lazy, PqCase::ZeroOutputInit).phase, Phase::Kernel);
        assert_eq!(classify_phase(&lazy, ind).phase, Phase::FeatureLearning);
        assert_eq!(classify_phase(&tuple(1, r(-1, 2), 0, 0, 0), PqCase::AssumeNotConverging).phase, Phase::FeatureLearning);
    }

    #[test]
    fn rate_imbalance_needs_finite_width() {
        // c_d = 0 and c_u + c_ηw ≠ c_w + c_ηu
        let s = ScalingExponents::new(int(0), int(1), int(0), int(0), int(-2), int(-3));
        let label = classify_phase(&s, PqCase::RateImbalanceAuto);
        assert!(label.pq_ratio_converges);
        let balanced = ScalingExponents::new(int(0), int(1), int(0), int(0), int(-2), int(-2));
        assert!(!classify_phase(&balanced, PqCase::RateImbalanceAuto).pq_ratio_converges);
    }

    #[test]
    fn corollaries() {
        assert_eq!(stable_learning_rate(&tuple(1, int(-1), 0, 0, 0)), int(1));
        assert_eq!(stable_learning_rate(&tuple(1, int(0), -1, 0, 0)), int(-1));
        assert_eq!(stable_learning_rate(&tuple(0, int(0), 0, 0, 0)), int(0));
        assert_eq!(force_feature_learning(int(-1), int(0), int(1)), (int(1), int(-1)));
        assert_eq!(force_feature_learning(int(-1), int(-1), int(1)), (int(0), int(0)));
        assert_eq!(force_kernel(int(0), int(0), int(1), None).unwrap(), (int(0), r(-1, 2)));
        assert_eq!(force_kernel(int(-1), int(-1), int(1), Some(int(-2))).unwrap(), (int(-2), int(1)));
        assert!(force_kernel(int(0), int(0), int(1), Some(int(1))).is_err());
    }

    #[test]
    fn delta_examples() {
        let ntk = tuple(1, r(-1, 2), 0, 0, 0);
        let label = classify_phase(&ntk, PqCase::InfiniteWidthIndependent);
        assert_eq!(delta_exponent(&ntk, &label), Some(r(1, 2)));
        let kaiming_minus = tuple(1, int(0), -1, 0, -1);
        let label = classify_phase(&kaiming_minus, PqCase::InfiniteWidthIndependent);
        assert_eq!(label.phase, Phase::Kernel);
        assert_eq!(delta_exponent(&kaiming_minus, &label), Some(int(2)));
        let frozen = tuple(1, int(-1), 0, 0, 0);
        assert_eq!(delta_exponent(&frozen, &classify_phase(&frozen, PqCase::default())), None);
    }

    #[test]
    fn abc_identity_and_invariance() {
        let ntk = tuple(1, r(-1, 2), 0, 0, 0);
        assert_eq!(abc_transform(&ntk, int(0)), ntk);
        let moved = abc_transform(&ntk, int(1));
        assert_eq!(classify_phase(&moved, PqCase::default()), classify_phase(&ntk, PqCase::default()));
    }
}

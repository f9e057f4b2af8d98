use lindyn::phase::{
    abc_transform, cell_exponents, classify_phase, empirical_phase_probe, instantiate, stability_exponent, Block,
    Phase, PqCase, ProbeConfig, ProbeInit, ScalingExponents, Scaling,
};
use lindyn::{closed_form_params, to_pq, Rational64};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational64> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| Rational64::new(n, d))
}

fn tuple() -> impl Strategy<Value = ScalingExponents> {
    (rational(), rational(), rational(), rational(), rational(), rational())
        .prop_map(|(a, b, c, d, e, f)| ScalingExponents::new(a, b, c, d, e, f))
}

proptest! {
    #[test]
    fn abc_transform_preserves_phase(s in tuple(), theta in rational()) {
        for case in [PqCase::InfiniteWidthIndependent, PqCase::RateImbalanceAuto, PqCase::ZeroOutputInit] {
            prop_assert_eq!(classify_phase(&s, case), classify_phase(&abc_transform(&s, theta), case));
        }
    }

    #[test]
    fn exponents_survive_json(s in tuple()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: ScalingExponents = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(s, back);
    }
}

fn mean_tc(s: &ScalingExponents, kappa: f64) -> f64 {
    let cfg = ProbeConfig::default();
    (0..8)
        .map(|r| {
            let (hp, data, init) = instantiate(s, kappa, &cfg, 5, r).unwrap();
            closed_form_params(&to_pq(&init, &data, &hp).unwrap(), &data, &hp).unwrap().t_c
        })
        .sum::<f64>()
        / 8.0
}

#[test]
fn characteristic_time_follows_stability() {
    let frozen = Scaling::MeanField.base();
    let unstable = Scaling::Kaiming.base();
    let stable = cell_exponents(Scaling::Ntk, Block::Base);
    assert!(stability_exponent(&frozen) < Rational64::from_integer(0));
    assert!(stability_exponent(&unstable) > Rational64::from_integer(0));
    assert!(mean_tc(&frozen, 1024.0) > 50.0 * mean_tc(&frozen, 4.0));
    assert!(mean_tc(&unstable, 1024.0) < mean_tc(&unstable, 4.0) / 50.0);
    let ratio = mean_tc(&stable, 1024.0) / mean_tc(&stable, 4.0);
    assert!(ratio > 0.5 && ratio < 2.0, "ratio {ratio}");
}

#[test]
fn kernel_drift_vanishes_while_feature_learning_drift_persists() {
    let kappas = [4.0, 64.0, 1024.0];
    let cfg = ProbeConfig { replicates: 16, ..ProbeConfig::default() };
    let kernel = empirical_phase_probe(&Scaling::Ntk.base(), &kappas, 1, &cfg, PqCase::default()).unwrap();
    assert_eq!(kernel.phase, Phase::Kernel);
    let k: Vec<f64> = kernel.rows.iter().map(|r| r.ntk_drift).collect();
    assert!(k[2] < k[0] / 8.0, "{k:?}");
    let gaps: Vec<f64> = kernel.rows.iter().map(|r| r.alpha_gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));

    let mf = cell_exponents(Scaling::MeanField, Block::StableRate);
    let learning = empirical_phase_probe(&mf, &kappas, 1, &cfg, PqCase::default()).unwrap();
    assert_eq!(learning.phase, Phase::FeatureLearning);
    let f: Vec<f64> = learning.rows.iter().map(|r| r.ntk_drift).collect();
    assert!(f[2] > f[0] / 2.0, "{f:?}");
}

#[test]
fn independent_init_carries_width_fluctuation() {
    // with independent draws P/Q − 1 ~ d^{-1/2} dominates the Xavier⁻ gap
    let kappas: Vec<f64> = (2..=10).map(|e| 2f64.powi(e)).collect();
    let s = cell_exponents(Scaling::Xavier, Block::Kernel);
    let cfg = ProbeConfig { init: ProbeInit::Independent, replicates: 32, ..ProbeConfig::default() };
    let probe = empirical_phase_probe(&s, &kappas, 42, &cfg, PqCase::default()).unwrap();
    assert!((probe.fitted_delta - 0.5).abs() < 0.1, "{}", probe.fitted_delta);
    let mirrored = empirical_phase_probe(&s, &kappas, 42, &ProbeConfig::default(), PqCase::default()).unwrap();
    assert!((mirrored.fitted_delta - 1.0).abs() < 0.1, "{}", mirrored.fitted_delta);
}

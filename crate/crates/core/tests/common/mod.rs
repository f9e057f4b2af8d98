#![allow(dead_code)]

use lindyn::init::{gaussian, seeded_rng};
use lindyn::oracle::IntegratorConfig;
use lindyn::{EffectiveData64, Hyperparams64, WeightState64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    seeded_rng(seed, stream)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Random β = 1 instance: widths `d ≤ 16`, `d0 ≤ 8`, log-uniform rates and
/// output scale, Gaussian init scaled so the initial output is O(1).
pub fn random_linear(rng: &mut ChaCha8Rng) -> (Hyperparams64, EffectiveData64, WeightState64) {
    let d = rng.random_range(1..=16);
    let d0 = rng.random_range(1..=8);
    let eta_u = log_uniform(rng, 1e-3, 1e1);
    let eta_w = log_uniform(rng, 1e-3, 1e1);
    let gamma = log_uniform(rng, 1e-2, 1e2);
    let hp = Hyperparams64::new(eta_u, eta_w, gamma, 1, d, d0).unwrap();
    let x: Vec<f64> = (0..d0).map(|_| normal(rng)).collect();
    let y = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let data = EffectiveData64::from_point(x, y).unwrap();
    let var = log_uniform(rng, 0.05, 5.0) / (gamma * d as f64 * data.norm());
    let init = gaussian(d, d0, var.sqrt(), var.sqrt(), rng);
    (hp, data, init)
}

/// `t = 0` followed by `n` log-spaced points on `[t_c/100, horizon·t_c]`.
pub fn log_grid(t_c: f64, horizon: f64, n: usize) -> Vec<f64> {
    let (a, b) = ((t_c / 100.0).ln(), (horizon * t_c).ln());
    std::iter::once(0.0)
        .chain((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()))
        .collect()
}

pub fn oracle_cfg(t_end: f64) -> IntegratorConfig<f64> {
    IntegratorConfig::new(t_end).with_tolerances(1e-10, 1e-12)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

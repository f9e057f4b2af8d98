//! Seeded weight initializations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::WeightState;
use crate::scalar::Real;

/// ChaCha8 generator for `seed`, on an independent stream per `stream`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R, sigma: T) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z) * sigma
}

/// `u_i ~ N(0, σ_u²)` and `w_ij ~ N(0, σ_w²)`, all independent.
pub fn gaussian<T: Real, R: Rng + ?Sized>(d: usize, d0: usize, sigma_u: T, sigma_w: T, rng: &mut R) -> WeightState<T> {
    let u = (0..d).map(|_| normal(rng, sigma_u)).collect();
    let w = (0..d).map(|_| (0..d0).map(|_| normal(rng, sigma_w)).collect()).collect();
    WeightState::new(u, w)
}

/// Gaussian weights in mirrored pairs `(u, w)`, `(−u, w)`; with odd `d` the
/// last neuron has `u = 0`. The initial output is zero and `P = Q`.
pub fn mirrored_gaussian<T: Real, R: Rng + ?Sized>(
    d: usize,
    d0: usize,
    sigma_u: T,
    sigma_w: T,
    rng: &mut R,
) -> WeightState<T> {
    let mut u = Vec::with_capacity(d);
    let mut w = Vec::with_capacity(d);
    while u.len() < d {
        let ui = normal(rng, sigma_u);
        let row: Vec<T> = (0..d0).map(|_| normal(rng, sigma_w)).collect();
        if u.len() + 1 == d {
            u.push(T::zero());
            w.push(row);
        } else {
            u.push(ui);
            u.push(-ui);
            w.push(row.clone());
            w.push(row);
        }
    }
    WeightState::new(u, w)
}

/// Rows `W_i = scale · v_i · n` and `u_i = ratio · scale · v_i` with `v_i ~ N(0, 1)`:
/// `u` is parallel (`ratio > 0`) or anti-parallel (`ratio < 0`) to `W n`.
pub fn parallel<T: Real, R: Rng + ?Sized>(n: &[T], scale: T, ratio: T, d: usize, rng: &mut R) -> WeightState<T> {
    let v: Vec<T> = (0..d).map(|_| normal(rng, T::one())).collect();
    let u = v.iter().map(|&vi| ratio * scale * vi).collect();
    let w = v.iter().map(|&vi| n.iter().map(|&nj| scale * vi * nj).collect()).collect();
    WeightState::new(u, w)
}

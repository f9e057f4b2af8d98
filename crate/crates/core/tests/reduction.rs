mod common;

use lindyn::oracle::gradient_flow_rhs;
use lindyn::{model_output, reduce_dataset, training_loss, Hyperparams64, RawDataset64, Reduction, WeightState64};
use rand::Rng;

fn random_raw(rng: &mut rand_chacha::ChaCha8Rng, d0: usize) -> RawDataset64 {
    let n: Vec<f64> = (0..d0).map(|_| common::normal(rng)).collect();
    let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n: Vec<f64> = n.iter().map(|v| v / norm).collect();
    let samples = (0..rng.random_range(2..9)).map(|_| (rng.random_range(-2.0..2.0), common::normal(rng))).collect();
    RawDataset64::new(n, samples).unwrap()
}

fn raw_loss(state: &WeightState64, raw: &RawDataset64, hp: &Hyperparams64, reduction: Reduction) -> f64 {
    let total: f64 = raw
        .samples
        .iter()
        .map(|&(a, y)| {
            let x: Vec<f64> = raw.direction.iter().map(|v| a * v).collect();
            (model_output(state, &x, hp) - y).powi(2)
        })
        .sum();
    match reduction {
        Reduction::Mean => total / raw.samples.len() as f64,
        Reduction::Sum => total,
    }
}

fn random_state(rng: &mut rand_chacha::ChaCha8Rng, d: usize, d0: usize) -> WeightState64 {
    lindyn::init::gaussian(d, d0, 0.7, 0.7, rng)
}

#[test]
fn effective_loss_equals_dataset_loss() {
    for beta in 1..=3 {
        for reduction in [Reduction::Mean, Reduction::Sum] {
            for k in 0..10 {
                let mut rng = common::rng(20 + beta as u64, k);
                let (d, d0) = (rng.random_range(1..6), rng.random_range(1..4));
                let hp = Hyperparams64::new(0.5, 1.5, 0.8, beta, d, d0).unwrap();
                let raw = random_raw(&mut rng, d0);
                let data = reduce_dataset(&raw, &hp, reduction).unwrap();
                let state = random_state(&mut rng, d, d0);
                let (a, b) = (training_loss(&state, &data, &hp), raw_loss(&state, &raw, &hp, reduction));
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "β={beta} {reduction:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn quadratic_reduction_matches_dataset_gradient() {
    let h = 1e-6;
    for k in 0..10 {
        let mut rng = common::rng(30, k);
        let (d, d0) = (3, 2);
        let hp = Hyperparams64::new(0.7, 1.2, 0.9, 2, d, d0).unwrap();
        let raw = random_raw(&mut rng, d0);
        let data = reduce_dataset(&raw, &hp, Reduction::Mean).unwrap();
        let state = random_state(&mut rng, d, d0);
        let (du, dw) = gradient_flow_rhs(&state, &data, &hp).unwrap();
        for i in 0..d {
            let fd = |f: &dyn Fn(&mut WeightState64, f64)| {
                let (mut a, mut b) = (state.clone(), state.clone());
                f(&mut a, h);
                f(&mut b, -h);
                (raw_loss(&a, &raw, &hp, Reduction::Mean) - raw_loss(&b, &raw, &hp, Reduction::Mean)) / (2.0 * h)
            };
            let gu = fd(&|s, e| s.u[i] += e);
            assert!((du[i] + hp.eta_u * gu).abs() < 1e-6 * (1.0 + gu.abs()));
            for j in 0..d0 {
                let gw = fd(&|s, e| s.w[i][j] += e);
                assert!((dw[i][j] + hp.eta_w * gw).abs() < 1e-6 * (1.0 + gw.abs()));
            }
        }
    }
}

#[test]
fn quadratic_example_scale() {
    // samples a ∈ {1, 2}, unit direction: |x| = ((1 + 16)/2)^{1/4}
    let hp = Hyperparams64::new(1.0, 1.0, 1.0, 2, 1, 1).unwrap();
    let raw = RawDataset64::new(vec![1.0], vec![(1.0, 1.0), (2.0, 3.0)]).unwrap();
    let data = reduce_dataset(&raw, &hp, Reduction::Mean).unwrap();
    assert!((data.x[0] - 8.5f64.powf(0.25)).abs() < 1e-12);
    assert!((data.x[0] - 1.70747).abs() < 1e-5);
}

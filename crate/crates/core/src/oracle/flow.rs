//! Direct integration of the two-layer gradient flow.

use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::model::{EffectiveData, Hyperparams, WeightState};
use crate::oracle::audit::{conservation_audit, ConservationReport};
use crate::oracle::integrator::{integrate_samples, IntegratorConfig};
use crate::scalar::{dot, Real};

/// Time derivative `(du/dt, dW/dt)` of the gradient flow on the reduced loss
/// `(f(x) − y)²`:
///
/// ```text
/// du_i/dt  = −2 η_u γ h_i^β r
/// dw_ij/dt = −2 β η_w γ u_i h_i^{β−1} x_j r
/// ```
///
/// with `h_i = w_i · x` and `r = f(x) − y`.
pub fn gradient_flow_rhs<T: Real>(
    state: &WeightState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    state.check_dims(hp)?;
    if data.d0() != hp.d0 {
        return Err(Error::DimensionMismatch(format!("x has length {}, d0 = {}", data.d0(), hp.d0)));
    }
    let mut flat = vec![T::zero(); hp.d * (hp.d0 + 1)];
    flow_rhs_flat(&state.to_flat(), &mut flat, data, hp);
    let du = flat[..hp.d].to_vec();
    let dw = flat[hp.d..].chunks(hp.d0).map(<[T]>::to_vec).collect();
    Ok((du, dw))
}

fn residual<T: Real>(y: &[T], data: &EffectiveData<T>, hp: &Hyperparams<T>) -> T {
    let (d, d0) = (hp.d, hp.d0);
    let beta = hp.beta as i32;
    let mut f = T::zero();
    for i in 0..d {
        let h = dot(&y[d + i * d0..d + (i + 1) * d0], &data.x);
        f = f + y[i] * h.powi(beta);
    }
    hp.gamma * f - data.y
}

fn flow_rhs_flat<T: Real>(y: &[T], dy: &mut [T], data: &EffectiveData<T>, hp: &Hyperparams<T>) {
    let (d, d0) = (hp.d, hp.d0);
    let beta = hp.beta as i32;
    let r = residual(y, data, hp);
    let two = T::lit(2.0);
    let cu = -two * hp.eta_u * hp.gamma * r;
    let cw = -two * hp.beta_t() * hp.eta_w * hp.gamma * r;
    for i in 0..d {
        let row = d + i * d0;
        let h = dot(&y[row..row + d0], &data.x);
        dy[i] = cu * h.powi(beta);
        let g = cw * y[i] * h.powi(beta - 1);
        for (j, &x) in data.x.iter().enumerate() {
            dy[row + j] = g * x;
        }
    }
}

/// Trajectory of a direct integration with its conservation audit.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrated<T> {
    pub trajectory: Trajectory<T>,
    pub audit: ConservationReport<T>,
}

/// Integrates on a uniform grid of 201 samples over `[init.t, init.t + cfg.t_end]`.
pub fn integrate<T: Real>(
    init: &WeightState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Integrated<T>> {
    let n = 200;
    let times: Vec<T> = (0..=n)
        .map(|k| init.t + cfg.t_end * T::from_usize_lossy(k) / T::from_usize_lossy(n))
        .collect();
    integrate_at(init, data, hp, cfg, &times)
}

/// Integrates and samples at the given ascending times, all `>= init.t`.
pub fn integrate_at<T: Real>(
    init: &WeightState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    cfg: &IntegratorConfig<T>,
    times: &[T],
) -> Result<Integrated<T>> {
    hp.validate()?;
    init.check_dims(hp)?;
    if data.d0() != hp.d0 {
        return Err(Error::DimensionMismatch(format!("x has length {}, d0 = {}", data.d0(), hp.d0)));
    }
    let tol = cfg.stop_residual;
    let out = integrate_samples(
        |_, y, dy| {
            flow_rhs_flat(y, dy, data, hp);
            Ok(())
        },
        init.t,
        &init.to_flat(),
        times,
        cfg,
        |_, y| tol.is_some_and(|tol| residual(y, data, hp).abs() < tol),
    )?;
    let states = out
        .states
        .iter()
        .zip(times)
        .map(|(y, &t)| WeightState::from_flat(t, y, hp.d, hp.d0))
        .collect();
    let mut trajectory = Trajectory::from_states(states, data, hp)?;
    trajectory.converged_at = out.stopped_at;
    let audit = conservation_audit(&trajectory, data, hp)?;
    Ok(Integrated { trajectory, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::training_loss;

    #[test]
    fn worked_instance_derivative() {
        let data = EffectiveData::<f64>::from_point(vec![1.0], 1.0).unwrap();
        let hp = Hyperparams::linear(1.0, 1.0, 1, 1).unwrap();
        let s = WeightState::new(vec![0.0], vec![vec![1.0]]);
        let (du, dw) = gradient_flow_rhs(&s, &data, &hp).unwrap();
        assert!((du[0] - 2.0).abs() < 1e-15);
        assert_eq!(dw[0][0], 0.0);
    }

    #[test]
    fn zero_at_saddle_and_minimum() {
        let data = EffectiveData::<f64>::from_point(vec![1.0, 2.0], 0.7).unwrap();
        let hp = Hyperparams::new(1.0, 2.0, 1.0, 2, 2, 2).unwrap();
        let (du, dw) = gradient_flow_rhs(&WeightState::zeros(2, 2), &data, &hp).unwrap();
        assert!(du.iter().chain(dw.iter().flatten()).all(|&v| v == 0.0));
        // h = 1 for the first neuron, output = u_0 = y
        let s = WeightState::new(vec![0.7, 0.0], vec![vec![1.0, 0.0], vec![0.3, -0.1]]);
        let (du, dw) = gradient_flow_rhs(&s, &data, &hp).unwrap();
        assert!(du.iter().chain(dw.iter().flatten()).all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn matches_finite_differences() {
        let data = EffectiveData::from_point(vec![0.8, -0.4], 0.3).unwrap();
        for beta in 1..=3 {
            let hp = Hyperparams::new(0.7, 1.3, 0.9, beta, 2, 2).unwrap();
            let s = WeightState::new(vec![0.4, -0.6], vec![vec![0.5, 0.2], vec![-0.3, 0.9]]);
            let (du, dw) = gradient_flow_rhs(&s, &data, &hp).unwrap();
            let h = 1e-6;
            let loss = |st: &WeightState<f64>| training_loss(st, &data, &hp);
            for i in 0..2 {
                let (mut a, mut b) = (s.clone(), s.clone());
                a.u[i] += h;
                b.u[i] -= h;
                let g = (loss(&a) - loss(&b)) / (2.0 * h);
                assert!((du[i] + hp.eta_u * g).abs() < 1e-7, "beta {beta} u{i}");
                for j in 0..2 {
                    let (mut a, mut b) = (s.clone(), s.clone());
                    a.w[i][j] += h;
                    b.w[i][j] -= h;
                    let g = (loss(&a) - loss(&b)) / (2.0 * h);
                    assert!((dw[i][j] + hp.eta_w * g).abs() < 1e-7, "beta {beta} w{i}{j}");
                }
            }
        }
    }

    #[test]
    fn worked_instance_endpoint() {
        let data = EffectiveData::from_point(vec![1.0], 1.0).unwrap();
        let hp = Hyperparams::linear(1.0, 1.0, 1, 1).unwrap();
        let init = WeightState::new(vec![0.0], vec![vec![1.0]]);
        let run = integrate(&init, &data, &hp, &IntegratorConfig::new(40.0)).unwrap();
        let end = run.trajectory.last().unwrap();
        let w2 = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((end.w[0][0] - w2.sqrt()).abs() < 1e-6);
        assert!((end.u[0] - (w2 - 1.0).sqrt()).abs() < 1e-6);
        assert!(run.trajectory.converged_at.is_some());
    }

    #[test]
    fn start_at_minimum_is_constant() {
        let data = EffectiveData::from_point(vec![1.0], 1.0).unwrap();
        let hp = Hyperparams::linear(1.0, 1.0, 1, 1).unwrap();
        let init = WeightState::new(vec![1.0], vec![vec![1.0]]);
        let run = integrate(&init, &data, &hp, &IntegratorConfig::new(5.0)).unwrap();
        assert!(run.trajectory.states.iter().all(|s| s.u == init.u && s.w == init.w));
        assert_eq!(run.trajectory.converged_at, Some(0.0));
    }
}

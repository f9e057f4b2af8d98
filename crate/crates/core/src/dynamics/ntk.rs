use crate::error::{Error, Result};
use crate::model::{Hyperparams, WeightState};
use crate::scalar::{dot, Real};

/// Neural tangent kernel `K(x, x')` with per-layer learning rates, defined so
/// that `df(x)/dt = −2 K(x, x') (f(x') − y)` under the gradient flow.
///
/// For β = 1 this is `γ² (η_u xᵀWᵀWx' + η_w ||u||² x·x')`. With equal rates it
/// is `η` times the standard kernel.
pub fn ntk<T: Real>(state: &WeightState<T>, x: &[T], x_prime: &[T], hp: &Hyperparams<T>) -> Result<T> {
    state.check_dims(hp)?;
    if x.len() != hp.d0 || x_prime.len() != hp.d0 {
        return Err(Error::DimensionMismatch("kernel inputs must have length d0".into()));
    }
    let beta = hp.beta as i32;
    let bt = hp.beta_t();
    let xx = dot(x, x_prime);
    let mut from_u = T::zero();
    let mut from_w = T::zero();
    for (row, &u) in state.w.iter().zip(&state.u) {
        let h = dot(row, x);
        let hp_ = dot(row, x_prime);
        from_u = from_u + h.powi(beta) * hp_.powi(beta);
        from_w = from_w + u * u * (h * hp_).powi(beta - 1);
    }
    Ok(hp.gamma * hp.gamma * (hp.eta_u * from_u + hp.eta_w * bt * bt * from_w * xx))
}

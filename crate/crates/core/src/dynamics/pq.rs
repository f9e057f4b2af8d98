//! The p/q coordinates that decouple the two-layer gradient flow.
//!
//! For neuron `i`, with `h_i = w_i · x` and `r = ||x||`:
//!
//! ```text
//! p_i = (√η_u h_i + √(βη_w) r u_i) / (2r)
//! q_i = (√η_u h_i − √(βη_w) r u_i) / (2r)
//! ```
//!
//! The product `p_i q_i` is conserved along the flow, and the component of each
//! row of `W` orthogonal to `x` never moves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EffectiveData, Hyperparams, WeightState};
use crate::scalar::{dot, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PQState<T> {
    pub p: Vec<T>,
    pub q: Vec<T>,
    /// Conserved products `p_i q_i`, fixed at construction.
    c: Vec<T>,
    /// Rows of `W` with their component along `x` removed.
    pub w_orth: Vec<Vec<T>>,
}

impl<T: Real> PQState<T> {
    /// Builds a state from coordinates; the conserved products are taken from `p` and `q`.
    pub fn new(p: Vec<T>, q: Vec<T>, w_orth: Vec<Vec<T>>) -> Result<Self> {
        if p.len() != q.len() || p.len() != w_orth.len() {
            return Err(Error::DimensionMismatch(format!(
                "p: {}, q: {}, w_orth rows: {}",
                p.len(),
                q.len(),
                w_orth.len()
            )));
        }
        let c = p.iter().zip(&q).map(|(&a, &b)| a * b).collect();
        Ok(Self { p, q, c, w_orth })
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    /// `P = mean(p_i²)`.
    pub fn p_stat(&self) -> T {
        mean_sq(&self.p)
    }

    /// `Q = mean(q_i²)`.
    pub fn q_stat(&self) -> T {
        mean_sq(&self.q)
    }

    /// `S = mean(p_i q_i)`, conserved along the flow.
    pub fn s_stat(&self) -> T {
        self.c.iter().copied().sum::<T>() / T::from_usize_lossy(self.c.len())
    }

    /// Same conserved products and orthogonal residue, new coordinates.
    pub(crate) fn with_coords(&self, p: Vec<T>, q: Vec<T>) -> Self {
        Self { p, q, c: self.c.clone(), w_orth: self.w_orth.clone() }
    }
}

fn mean_sq<T: Real>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum::<T>() / T::from_usize_lossy(v.len())
}

fn check_data<T: Real>(data: &EffectiveData<T>, hp: &Hyperparams<T>) -> Result<T> {
    if data.d0() != hp.d0 {
        return Err(Error::DimensionMismatch(format!("x has length {}, d0 = {}", data.d0(), hp.d0)));
    }
    let r = data.norm();
    if r == T::zero() {
        return Err(Error::DegenerateData);
    }
    Ok(r)
}

pub fn to_pq<T: Real>(state: &WeightState<T>, data: &EffectiveData<T>, hp: &Hyperparams<T>) -> Result<PQState<T>> {
    hp.validate()?;
    state.check_dims(hp)?;
    let r = check_data(data, hp)?;
    let su = hp.eta_u.sqrt();
    let sw = (hp.beta_t() * hp.eta_w).sqrt();
    let two_r = r + r;
    let r2 = r * r;
    let mut p = Vec::with_capacity(hp.d);
    let mut q = Vec::with_capacity(hp.d);
    let mut w_orth = Vec::with_capacity(hp.d);
    for (row, &u) in state.w.iter().zip(&state.u) {
        let h = dot(row, &data.x);
        p.push((su * h + sw * r * u) / two_r);
        q.push((su * h - sw * r * u) / two_r);
        let along = h / r2;
        w_orth.push(row.iter().zip(&data.x).map(|(&w, &x)| w - along * x).collect());
    }
    PQState::new(p, q, w_orth)
}

/// Inverse of [`to_pq`]: `u_i = (p_i − q_i)/√(βη_w)` and
/// `W_i = w_orth_i + (p_i + q_i) x / (√η_u ||x||)`.
pub fn from_pq<T: Real>(pq: &PQState<T>, data: &EffectiveData<T>, hp: &Hyperparams<T>, t: T) -> Result<WeightState<T>> {
    if pq.d() != hp.d || pq.w_orth.iter().any(|r| r.len() != hp.d0) {
        return Err(Error::DimensionMismatch(format!("pq has width {}, d = {}", pq.d(), hp.d)));
    }
    let r = check_data(data, hp)?;
    let su = hp.eta_u.sqrt();
    let sw = (hp.beta_t() * hp.eta_w).sqrt();
    let u = pq.p.iter().zip(&pq.q).map(|(&p, &q)| (p - q) / sw).collect();
    let w = pq
        .p
        .iter()
        .zip(&pq.q)
        .zip(&pq.w_orth)
        .map(|((&p, &q), orth)| {
            let coef = (p + q) / (su * r);
            orth.iter().zip(&data.x).map(|(&o, &x)| o + coef * x).collect()
        })
        .collect();
    Ok(WeightState { t, u, w })
}

/// First-layer reconstruction exactly as printed in the published closed form,
/// `w_ij(t) = w_ij(0) + (p_i + q_i) x_j / (√η_u ρ)`.
///
/// It fails the identity at `t = 0` and exists only for the errata report and
/// the fault-injection hook of the comparison command.
pub fn printed_first_layer<T: Real>(
    w0: &[Vec<T>],
    pq: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
) -> Vec<Vec<T>> {
    let su = hp.eta_u.sqrt();
    w0.iter()
        .zip(pq.p.iter().zip(&pq.q))
        .map(|(row, (&p, &q))| {
            row.iter().zip(&data.x).map(|(&w, &x)| w + (p + q) * x / (su * data.rho)).collect()
        })
        .collect()
}

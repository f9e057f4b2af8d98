//! Network definition, hyperparameters and the reduction of a 1-D dataset to
//! a single effective sample.
//!
//! The network is `f(x) = γ Σ_i u_i (Σ_j w_ij x_j)^β`, trained by gradient flow
//! on the squared loss with separate learning rates for the two layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Real};

/// Learning rates, output scale, activation power and widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams<T> {
    pub eta_u: T,
    pub eta_w: T,
    pub gamma: T,
    #[serde(default = "default_beta")]
    pub beta: u32,
    pub d: usize,
    pub d0: usize,
}

fn default_beta() -> u32 {
    1
}

impl<T: Real> Hyperparams<T> {
    pub fn new(eta_u: T, eta_w: T, gamma: T, beta: u32, d: usize, d0: usize) -> Result<Self> {
        let hp = Self { eta_u, eta_w, gamma, beta, d, d0 };
        hp.validate()?;
        Ok(hp)
    }

    /// Linear network (β = 1) with equal learning rates.
    pub fn linear(eta: T, gamma: T, d: usize, d0: usize) -> Result<Self> {
        Self::new(eta, eta, gamma, 1, d, d0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.eta_u) || !positive(self.eta_w) {
            return Err(Error::InvalidHyperparams("learning rates must be positive".into()));
        }
        if !positive(self.gamma) {
            return Err(Error::InvalidHyperparams("gamma must be positive".into()));
        }
        if self.beta == 0 {
            return Err(Error::InvalidHyperparams("beta must be >= 1".into()));
        }
        if self.d == 0 || self.d0 == 0 {
            return Err(Error::InvalidHyperparams("widths d and d0 must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn beta_t(&self) -> T {
        T::from_u32(self.beta).expect("beta representable")
    }

    pub(crate) fn d_t(&self) -> T {
        T::from_usize_lossy(self.d)
    }
}

/// Samples `(a_k, ỹ_k)` whose inputs all lie on the line spanned by `direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDataset<T> {
    pub direction: Vec<T>,
    pub samples: Vec<(T, T)>,
}

impl<T: Real> RawDataset<T> {
    pub fn new(direction: Vec<T>, samples: Vec<(T, T)>) -> Result<Self> {
        let raw = Self { direction, samples };
        raw.validate()?;
        Ok(raw)
    }

    pub fn validate(&self) -> Result<()> {
        if self.direction.is_empty() {
            return Err(Error::InvalidData("direction must be non-empty".into()));
        }
        let n = norm(&self.direction);
        if (n - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidData(format!("direction must be a unit vector, |n| = {n}")));
        }
        if self.samples.is_empty() {
            return Err(Error::InvalidData("at least one sample is required".into()));
        }
        Ok(())
    }

    pub fn d0(&self) -> usize {
        self.direction.len()
    }
}

/// How per-sample moments are aggregated when reducing a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// Averages over samples; the reduced loss equals the mean squared error.
    #[default]
    Mean,
    /// Sums over samples; the reduced loss equals the summed squared error.
    Sum,
}

/// The single effective sample `(x, y)` equivalent to a 1-D dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveData<T> {
    pub n: Vec<T>,
    /// Root-mean-square component of `x`, `||x|| / sqrt(d0)`.
    pub rho: T,
    pub x: Vec<T>,
    pub y: T,
    /// Constant separating the reduced loss from the original loss.
    pub loss_offset: T,
}

impl<T: Real> EffectiveData<T> {
    /// Builds the effective data directly from `x` and `y`.
    pub fn from_point(x: Vec<T>, y: T) -> Result<Self> {
        let x_norm = norm(&x);
        if x.is_empty() {
            return Err(Error::InvalidData("x must be non-empty".into()));
        }
        if x_norm == T::zero() {
            return Err(Error::DegenerateData);
        }
        let n = x.iter().map(|&v| v / x_norm).collect();
        let rho = x_norm / T::from_usize_lossy(x.len()).sqrt();
        Ok(Self { n, rho, x, y, loss_offset: T::zero() })
    }

    /// Euclidean norm of the effective input; the scale of the p/q transform.
    pub fn norm(&self) -> T {
        norm(&self.x)
    }

    pub fn d0(&self) -> usize {
        self.x.len()
    }
}

/// Collapses a 1-D dataset onto one effective sample with the same gradient flow.
///
/// With `m = mean(a^{2β})` and `s = mean(a^β ỹ)`, the reduced sample is
/// `x = m^{1/(2β)} n`, `y = s / sqrt(m)`, and `mean(ỹ²) − y²` is the loss offset.
/// The `Sum` convention replaces each mean by a sum.
pub fn reduce_dataset<T: Real>(
    raw: &RawDataset<T>,
    hp: &Hyperparams<T>,
    reduction: Reduction,
) -> Result<EffectiveData<T>> {
    raw.validate()?;
    hp.validate()?;
    if raw.d0() != hp.d0 {
        return Err(Error::DimensionMismatch(format!(
            "dataset direction has length {}, hyperparams d0 = {}",
            raw.d0(),
            hp.d0
        )));
    }
    let beta = hp.beta as i32;
    let scale = match reduction {
        Reduction::Mean => T::one() / T::from_usize_lossy(raw.samples.len()),
        Reduction::Sum => T::one(),
    };
    let (mut m2, mut cross, mut yy) = (T::zero(), T::zero(), T::zero());
    for &(a, y) in &raw.samples {
        let ab = a.powi(beta);
        m2 = m2 + ab * ab;
        cross = cross + ab * y;
        yy = yy + y * y;
    }
    let (m2, cross, yy) = (m2 * scale, cross * scale, yy * scale);
    if m2 == T::zero() {
        return Err(Error::DegenerateData);
    }
    let root = m2.sqrt();
    let x_norm = root.powf(T::one() / hp.beta_t());
    let x: Vec<T> = raw.direction.iter().map(|&n| n * x_norm).collect();
    let y = cross / root;
    let loss_offset = (yy - y * y).max(T::zero());
    let rho = x_norm / T::from_usize_lossy(hp.d0).sqrt();
    Ok(EffectiveData { n: raw.direction.clone(), rho, x, y, loss_offset })
}

/// Weights of both layers at time `t`. `w` is the d×d0 first-layer matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightState<T> {
    pub t: T,
    pub u: Vec<T>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<T>>,
}

impl<T: Real> WeightState<T> {
    pub fn new(u: Vec<T>, w: Vec<Vec<T>>) -> Self {
        Self { t: T::zero(), u, w }
    }

    pub fn zeros(d: usize, d0: usize) -> Self {
        Self::new(vec![T::zero(); d], vec![vec![T::zero(); d0]; d])
    }

    pub fn check_dims(&self, hp: &Hyperparams<T>) -> Result<()> {
        if self.u.len() != hp.d || self.w.len() != hp.d || self.w.iter().any(|r| r.len() != hp.d0) {
            return Err(Error::DimensionMismatch(format!(
                "weights are u: {}, W: {}x{}; expected d = {}, d0 = {}",
                self.u.len(),
                self.w.len(),
                self.w.first().map_or(0, Vec::len),
                hp.d,
                hp.d0
            )));
        }
        Ok(())
    }

    /// Pre-activations `w_i · x`.
    pub fn hidden(&self, x: &[T]) -> Vec<T> {
        self.w.iter().map(|row| dot(row, x)).collect()
    }

    pub fn u_norm(&self) -> T {
        norm(&self.u)
    }

    /// Frobenius norm of `W`.
    pub fn w_norm(&self) -> T {
        self.w.iter().flat_map(|r| r.iter()).map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Flattens into `[u; W row-major]`.
    pub(crate) fn to_flat(&self) -> Vec<T> {
        let mut out = self.u.clone();
        for row in &self.w {
            out.extend_from_slice(row);
        }
        out
    }

    pub(crate) fn from_flat(t: T, flat: &[T], d: usize, d0: usize) -> Self {
        let u = flat[..d].to_vec();
        let w = flat[d..].chunks(d0).map(<[T]>::to_vec).collect();
        Self { t, u, w }
    }
}

/// Model output `γ Σ_i u_i (w_i · x)^β`.
pub fn model_output<T: Real>(state: &WeightState<T>, x: &[T], hp: &Hyperparams<T>) -> T {
    let beta = hp.beta as i32;
    hp.gamma
        * state
            .u
            .iter()
            .zip(&state.w)
            .map(|(&u, row)| u * dot(row, x).powi(beta))
            .sum::<T>()
}

/// Training loss `(f(x) − y)² + offset` on the effective sample.
pub fn training_loss<T: Real>(state: &WeightState<T>, data: &EffectiveData<T>, hp: &Hyperparams<T>) -> T {
    let r = model_output(state, &data.x, hp) - data.y;
    r * r + data.loss_offset
}

use serde::{Deserialize, Serialize};

use crate::analysis::alignment::state_zeta;
use crate::dynamics::ntk::ntk;
use crate::error::{Error, Result};
use crate::model::{model_output, EffectiveData, Hyperparams, RawDataset, WeightState};
use crate::scalar::{dot, Real};

/// Scalars recorded at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub output: T,
    pub loss: T,
    pub ntk: T,
    /// Absent when `u` or the data-aligned first layer has zero norm.
    pub zeta: Option<T>,
    pub u_norm: T,
    pub w_norm: T,
}

/// Weight states and derived scalars on an ascending time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<WeightState<T>>,
    pub samples: Vec<TrajectorySample<T>>,
    /// Set by the integrator when it stopped on a vanishing residual; later
    /// samples hold the state reached at that time.
    pub converged_at: Option<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn from_states(states: Vec<WeightState<T>>, data: &EffectiveData<T>, hp: &Hyperparams<T>) -> Result<Self> {
        if states.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return Err(Error::InvalidConfig("trajectory times must be strictly ascending".into()));
        }
        let samples = states
            .iter()
            .map(|s| {
                let output = model_output(s, &data.x, hp);
                let r = output - data.y;
                Ok(TrajectorySample {
                    t: s.t,
                    output,
                    loss: r * r + data.loss_offset,
                    ntk: ntk(s, &data.x, &data.x, hp)?,
                    zeta: state_zeta(s, &data.x),
                    u_norm: s.u_norm(),
                    w_norm: s.w_norm(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states, samples, converged_at: None })
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn outputs(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.output).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&WeightState<T>> {
        self.states.last()
    }
}

/// Training and population loss at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPoint<T> {
    pub t: T,
    pub training: T,
    /// Slope `s(t)` with `f(a n) = a s(t)`; only meaningful for β = 1.
    pub slope: T,
    pub population: Option<T>,
}

/// Training loss along a trajectory and, when a population sample set is
/// given, the population loss `mean_k (a_k s(t) − ỹ_k)²`.
pub fn loss_trajectory<T: Real>(
    traj: &Trajectory<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    population: Option<&RawDataset<T>>,
) -> Vec<LossPoint<T>> {
    traj.states
        .iter()
        .zip(&traj.samples)
        .map(|(s, sample)| {
            let slope = hp.gamma
                * s.u
                    .iter()
                    .zip(&s.w)
                    .map(|(&u, row)| u * dot(row, &data.n).powi(hp.beta as i32))
                    .sum::<T>();
            let population = population.map(|pop| {
                let b = hp.beta as i32;
                let n = T::from_usize_lossy(pop.samples.len());
                pop.samples.iter().map(|&(a, y)| (a.powi(b) * slope - y).powi(2)).sum::<T>() / n
            });
            LossPoint { t: sample.t, training: sample.loss, slope, population }
        })
        .collect()
}

/// Least-squares slope `Σ a_k ỹ_k / Σ a_k²` the linear model converges to.
pub fn converged_slope<T: Real>(raw: &RawDataset<T>) -> T {
    let (num, den) = raw
        .samples
        .iter()
        .fold((T::zero(), T::zero()), |(n, d), &(a, y)| (n + a * y, d + a * a));
    num / den
}

//! Drift of the quantities the gradient flow conserves.

use serde::{Deserialize, Serialize};

use crate::dynamics::pq::to_pq;
use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::model::{EffectiveData, Hyperparams, WeightState};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConservationLaw {
    /// `p_i q_i` per neuron.
    PqProduct,
    /// `η_u Σ_j w_ij² − β η_w u_i²` per neuron.
    LayerBalance,
    /// `w_ij/x_j − w_ij'/x_j'` over pairs of nonzero input components.
    FirstLayerRatio,
}

/// Largest drift of one law over the trajectory, relative to `max(1, |initial value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawDrift<T> {
    pub law: ConservationLaw,
    pub max_drift: T,
    pub t_at_max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConservationReport<T> {
    pub laws: Vec<LawDrift<T>>,
}

impl<T: Real> ConservationReport<T> {
    pub fn drift(&self, law: ConservationLaw) -> T {
        self.laws.iter().find(|l| l.law == law).map_or(T::zero(), |l| l.max_drift)
    }

    pub fn max_drift(&self) -> T {
        self.laws.iter().fold(T::zero(), |m, l| m.max(l.max_drift))
    }
}

fn invariants<T: Real>(s: &WeightState<T>, data: &EffectiveData<T>, hp: &Hyperparams<T>) -> Result<[Vec<T>; 3]> {
    let pq = to_pq(s, data, hp)?;
    let products = pq.p.iter().zip(&pq.q).map(|(&p, &q)| p * q).collect();
    let bw = hp.beta_t() * hp.eta_w;
    let balance = s
        .u
        .iter()
        .zip(&s.w)
        .map(|(&u, row)| hp.eta_u * row.iter().map(|&w| w * w).sum::<T>() - bw * u * u)
        .collect();
    let nonzero: Vec<usize> = (0..hp.d0).filter(|&j| data.x[j] != T::zero()).collect();
    let mut ratios = Vec::new();
    for row in &s.w {
        for (a, &j) in nonzero.iter().enumerate() {
            for &k in &nonzero[a + 1..] {
                ratios.push(row[j] / data.x[j] - row[k] / data.x[k]);
            }
        }
    }
    Ok([products, balance, ratios])
}

/// Maximum drift of each conservation law against the first sample.
pub fn conservation_audit<T: Real>(
    traj: &Trajectory<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
) -> Result<ConservationReport<T>> {
    let first = traj.states.first().ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
    let base = invariants(first, data, hp)?;
    let laws = [ConservationLaw::PqProduct, ConservationLaw::LayerBalance, ConservationLaw::FirstLayerRatio];
    let mut report: Vec<LawDrift<T>> =
        laws.iter().map(|&law| LawDrift { law, max_drift: T::zero(), t_at_max: first.t }).collect();
    for s in &traj.states[1..] {
        let now = invariants(s, data, hp)?;
        for (k, entry) in report.iter_mut().enumerate() {
            for (&v, &v0) in now[k].iter().zip(&base[k]) {
                let drift = (v - v0).abs() / v0.abs().max(T::one());
                if drift > entry.max_drift || drift.is_nan() {
                    entry.max_drift = drift;
                    entry.t_at_max = s.t;
                }
            }
        }
    }
    Ok(ConservationReport { laws: report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_weight_is_flagged() {
        let data = EffectiveData::from_point(vec![1.0, 0.5], 0.5).unwrap();
        let hp = Hyperparams::linear(1.0, 1.0, 2, 2).unwrap();
        let s0 = WeightState::new(vec![0.3, -0.2], vec![vec![0.1, 0.4], vec![2.0, 1.0]]);
        let mut s1 = s0.clone();
        s1.t = 1.0;
        s1.w[1][0] += 1e-3;
        let traj = Trajectory::from_states(vec![s0, s1], &data, &hp).unwrap();
        let report = conservation_audit(&traj, &data, &hp).unwrap();
        for law in &report.laws {
            assert!(law.max_drift > 1e-4, "{:?}", law.law);
            assert_eq!(law.t_at_max, 1.0);
        }
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json[0]["law"], "pq_product");
    }
}

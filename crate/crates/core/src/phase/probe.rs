//! Concrete instances of a scaling tuple, solved exactly at a range of κ.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::closed_form::{closed_form_params, solve_from_state, SolveOptions};
use crate::dynamics::ntk::ntk;
use crate::dynamics::pq::to_pq;
use crate::error::{Error, Result};
use crate::init::{gaussian, mirrored_gaussian, seeded_rng};
use crate::model::{EffectiveData, Hyperparams, WeightState};
use crate::phase::classify::{classify_phase, delta_exponent, Phase, PqCase};
use crate::phase::exponents::ScalingExponents;

/// How the probe draws initial weights. Both have Gaussian marginals with
/// variances `κ^{c_u}`, `κ^{c_w}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeInit {
    /// Mirrored neuron pairs: zero initial output and `P = Q` at every width.
    #[default]
    Mirrored,
    /// Independent draws; `P/Q − 1` then fluctuates at order `d^{−1/2}`.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    /// Width at κ = 1.
    pub base_width: usize,
    /// Independent initializations averaged at each κ.
    pub replicates: usize,
    /// Evaluation time in units of `t_c`.
    pub horizon_tc: f64,
    pub init: ProbeInit,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { base_width: 8, replicates: 64, horizon_tc: 20.0, init: ProbeInit::Mirrored }
    }
}

/// Replicate averages at one κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub kappa: f64,
    pub t_c: f64,
    pub alpha_plus: f64,
    pub alpha_gap: f64,
    /// `||W − W_0|| / ||W_0||` at the horizon.
    pub weight_movement: f64,
    pub zeta_drift: f64,
    pub ntk_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable {
    pub exponents: ScalingExponents,
    pub phase: Phase,
    #[serde(serialize_with = "ser_opt_rational")]
    pub predicted_delta: Option<Rational64>,
    pub rows: Vec<ProbeRow>,
    /// Log-log slope of weight movement against κ.
    pub fitted_slope: f64,
    /// `−fitted_slope`.
    pub fitted_delta: f64,
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<Rational64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

fn kpow(kappa: f64, c: Rational64) -> f64 {
    kappa.powf(c.to_f64().expect("finite exponent"))
}

/// A β = 1, d0 = 1 instance with `x = y = 1`, width `base_width · κ^{c_d}` and
/// Gaussian initialization with variances `κ^{c_u}`, `κ^{c_w}` drawn per `cfg.init`.
pub fn instantiate(
    s: &ScalingExponents,
    kappa: f64,
    cfg: &ProbeConfig,
    seed: u64,
    stream: u64,
) -> Result<(Hyperparams<f64>, EffectiveData<f64>, WeightState<f64>)> {
    let d = (cfg.base_width as f64 * kpow(kappa, s.c_d)).round().max(1.0) as usize;
    let hp = Hyperparams::new(kpow(kappa, s.c_eta_u), kpow(kappa, s.c_eta_w), kpow(kappa, s.c_gamma), 1, d, 1)?;
    let data = EffectiveData::from_point(vec![1.0], 1.0)?;
    let (su, sw) = (kpow(kappa, s.c_u).sqrt(), kpow(kappa, s.c_w).sqrt());
    let mut rng = seeded_rng(seed, stream);
    let init = match cfg.init {
        ProbeInit::Mirrored => mirrored_gaussian(d, 1, su, sw, &mut rng),
        ProbeInit::Independent => gaussian(d, 1, su, sw, &mut rng),
    };
    Ok((hp, data, init))
}

fn replicate(s: &ScalingExponents, kappa: f64, cfg: &ProbeConfig, seed: u64, stream: u64) -> Result<[f64; 6]> {
    let (hp, data, init) = instantiate(s, kappa, cfg, seed, stream)?;
    let pq0 = to_pq(&init, &data, &hp)?;
    let params = closed_form_params(&pq0, &data, &hp)?;
    let horizon = cfg.horizon_tc * params.t_c;
    let (traj, _) = solve_from_state(&init, &data, &hp, &[0.0, horizon], &SolveOptions::default())?;
    let end = &traj.states[1];
    let moved: f64 = end.w.iter().zip(&init.w).map(|(a, b)| (a[0] - b[0]).powi(2)).sum::<f64>().sqrt();
    let movement = moved / init.w_norm();
    let zeta = |k: usize| traj.samples[k].zeta.unwrap_or(0.0);
    let k0 = ntk(&init, &data.x, &data.x, &hp)?;
    let k1 = ntk(end, &data.x, &data.x, &hp)?;
    let ap = params.alpha_plus.unwrap_or(f64::NAN);
    Ok([params.t_c, ap, (ap - 1.0).abs(), movement, (zeta(1) - zeta(0)).abs(), ((k1 - k0) / k0).abs()])
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Solves `cfg.replicates` instances at every κ and fits the decay of weight movement.
pub fn empirical_phase_probe(
    s: &ScalingExponents,
    kappas: &[f64],
    seed: u64,
    cfg: &ProbeConfig,
    pq_case: PqCase,
) -> Result<ProbeTable> {
    let label = classify_phase(s, pq_case);
    if matches!(label.phase, Phase::Frozen | Phase::Unstable) {
        return Err(Error::ProbeRejected(format!("tuple is {}", label.phase.as_str())));
    }
    if kappas.len() < 2 || kappas.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::ProbeRejected("need at least two finite positive kappa values".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::ProbeRejected("need at least one replicate".into()));
    }
    let reps = cfg.replicates as u64;
    let rows = kappas
        .par_iter()
        .enumerate()
        .map(|(ki, &kappa)| {
            let mut acc = [0.0; 6];
            for r in 0..reps {
                let vals = replicate(s, kappa, cfg, seed, ki as u64 * reps + r)?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += v / reps as f64;
                }
            }
            Ok(ProbeRow {
                kappa,
                t_c: acc[0],
                alpha_plus: acc[1],
                alpha_gap: acc[2],
                weight_movement: acc[3],
                zeta_drift: acc[4],
                ntk_drift: acc[5],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.kappa).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.weight_movement).collect();
    let fitted_slope = log_log_slope(&xs, &ys);
    Ok(ProbeTable {
        exponents: *s,
        phase: label.phase,
        predicted_delta: delta_exponent(s, &label),
        rows,
        fitted_slope,
        fitted_delta: -fitted_slope,
    })
}

//! Exact solution of the linear (β = 1) network.
//!
//! Writing `A(t) = p_i(t)² / p_i(0)²`, every neuron shares the same scale
//! factor, which obeys the Riccati equation
//!
//! ```text
//! dA/dt = −4 (k P A² − b A − k Q),   k = γ² d ||x||²,  b = √(η_u η_w) γ ||x|| y
//! ```
//!
//! with roots `α±` and characteristic time `t_c = 1/√(b² + 4k²PQ)`. Its
//! solution is `(A − α+)/(A − α−) = ξ(t)`, `ξ(t) = (1−α+)/(1−α−) · e^{−4t/t_c}`.

use serde::{Deserialize, Serialize};

use crate::dynamics::pq::{from_pq, to_pq, PQState};
use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::model::{EffectiveData, Hyperparams, WeightState};
use crate::scalar::Real;

/// Sufficient statistics of the initialization and the derived time and scale constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormParams<T> {
    #[serde(rename = "P")]
    pub p_stat: T,
    #[serde(rename = "Q")]
    pub q_stat: T,
    pub t_c: T,
    /// `None` when P = 0; the degenerate solution applies there.
    pub alpha_plus: Option<T>,
    pub alpha_minus: Option<T>,
    /// `k = γ² d ||x||²`.
    pub coupling: T,
    /// `b = √(η_u η_w) γ ||x|| y`.
    pub drive: T,
}

pub fn closed_form_params<T: Real>(
    pq0: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
) -> Result<ClosedFormParams<T>> {
    hp.validate()?;
    if hp.beta != 1 {
        return Err(Error::UnsupportedBeta(hp.beta));
    }
    if pq0.d() != hp.d {
        return Err(Error::DimensionMismatch(format!("pq has width {}, d = {}", pq0.d(), hp.d)));
    }
    let r = data.norm();
    let coupling = hp.gamma * hp.gamma * hp.d_t() * r * r;
    let drive = (hp.eta_u * hp.eta_w).sqrt() * hp.gamma * r * data.y;
    let (p_stat, q_stat) = (pq0.p_stat(), pq0.q_stat());
    let four = T::lit(4.0);
    let disc = drive * drive + four * coupling * coupling * p_stat * q_stat;
    if !(disc > T::zero()) {
        return Err(Error::FrozenDynamics("y = 0 and P·Q = 0: the characteristic time is infinite".into()));
    }
    let root = disc.sqrt();
    let (alpha_plus, alpha_minus) = if p_stat > T::zero() {
        let denom = (coupling + coupling) * p_stat;
        // pair the well-conditioned root with α+·α− = −Q/P
        if drive >= T::zero() {
            let ap = (drive + root) / denom;
            (Some(ap), Some(-q_stat / (p_stat * ap)))
        } else {
            let am = (drive - root) / denom;
            (Some(-q_stat / (p_stat * am)), Some(am))
        }
    } else {
        (None, None)
    };
    Ok(ClosedFormParams { p_stat, q_stat, t_c: root.recip(), alpha_plus, alpha_minus, coupling, drive })
}

impl<T: Real> ClosedFormParams<T> {
    fn alphas(&self) -> Result<(T, T)> {
        match (self.alpha_plus, self.alpha_minus) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::DegenerateRequired),
        }
    }

    /// `ξ(t)`; zero once `e^{−4t/t_c}` underflows.
    pub fn xi(&self, t: T) -> Result<T> {
        let (ap, am) = self.alphas()?;
        let log_decay = -T::lit(4.0) * t / self.t_c;
        if log_decay < T::min_positive_value().ln() {
            return Ok(T::zero());
        }
        Ok((T::one() - ap) / (T::one() - am) * log_decay.exp())
    }

    /// Scale factor `α(t) = p_i(t)²/p_i(0)²`, equal to 1 at `t = 0` and
    /// tending monotonically to `α+`.
    pub fn scale_factor(&self, t: T) -> Result<T> {
        let (ap, am) = self.alphas()?;
        if t <= T::zero() {
            return Ok(T::one());
        }
        let xi = self.xi(t)?;
        if xi == T::zero() {
            return Ok(ap);
        }
        Ok(ap + xi * (ap - am) / (T::one() - xi))
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha_plus.is_none()
    }
}

/// Free function form of [`ClosedFormParams::scale_factor`].
pub fn scale_factor<T: Real>(params: &ClosedFormParams<T>, t: T) -> Result<T> {
    params.scale_factor(t)
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|&t| !(t >= T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidConfig("sample times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("sample times must be strictly ascending".into()));
    }
    Ok(())
}

/// Evaluates the closed form for P > 0 at each requested time.
pub fn solve_trajectory<T: Real>(
    pq0: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    check_times(times)?;
    let params = closed_form_params(pq0, data, hp)?;
    if params.is_degenerate() {
        return Err(Error::DegenerateRequired);
    }
    let states = times
        .iter()
        .map(|&t| {
            let pq = pq_at(pq0, &params, t)?;
            from_pq(&pq, data, hp, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_states(states, data, hp)
}

/// p/q coordinates at time `t` from the closed form (P > 0).
pub fn pq_at<T: Real>(pq0: &PQState<T>, params: &ClosedFormParams<T>, t: T) -> Result<PQState<T>> {
    let s = params.scale_factor(t)?.sqrt();
    let p = pq0.p.iter().map(|&p| p * s).collect();
    let q = pq0.q.iter().map(|&q| if q == T::zero() { q } else { q / s }).collect();
    Ok(pq0.with_coords(p, q))
}

/// Solution when P = 0: `p ≡ 0` and `q_i(t) = q_i(0) √B(t)` with the logistic
/// factor `B(t) = α' / ((1 + α') e^{4bt} − 1)`, `α' = b / (k Q)`.
///
/// With `Q = 0` as well, the state sits at the saddle and never moves.
pub fn solve_degenerate<T: Real>(
    pq0: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    check_times(times)?;
    hp.validate()?;
    if hp.beta != 1 {
        return Err(Error::UnsupportedBeta(hp.beta));
    }
    let zero_p = vec![T::zero(); pq0.d()];
    let q_stat = pq0.q_stat();
    let states = if q_stat == T::zero() {
        let pq = pq0.with_coords(zero_p, pq0.q.clone());
        times.iter().map(|&t| from_pq(&pq, data, hp, t)).collect::<Result<Vec<_>>>()?
    } else {
        let params = closed_form_params(&pq0.with_coords(zero_p.clone(), pq0.q.clone()), data, hp)?;
        let (k, b) = (params.coupling, params.drive);
        let alpha = b / (k * q_stat);
        times
            .iter()
            .map(|&t| {
                let factor = degenerate_factor(alpha, b, t).sqrt();
                let q = pq0.q.iter().map(|&q| q * factor).collect();
                from_pq(&pq0.with_coords(zero_p.clone(), q), data, hp, t)
            })
            .collect::<Result<Vec<_>>>()?
    };
    Trajectory::from_states(states, data, hp)
}

fn degenerate_factor<T: Real>(alpha: T, b: T, t: T) -> T {
    if t <= T::zero() {
        return T::one();
    }
    let one = T::one();
    let decay = (-T::lit(4.0) * b.abs() * t).exp();
    if b > T::zero() {
        alpha * decay / (one + alpha - decay)
    } else {
        alpha / ((one + alpha) * decay - one)
    }
}

/// Which closed-form branch produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Regular,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    /// P below `threshold · Q` is treated as P = 0.
    pub degenerate_threshold: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self { degenerate_threshold: T::lit(1e-14) }
    }
}

/// Dispatches between the regular and the degenerate closed form.
pub fn solve<T: Real>(
    pq0: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    times: &[T],
    opts: &SolveOptions<T>,
) -> Result<(Trajectory<T>, SolutionKind)> {
    let (p, q) = (pq0.p_stat(), pq0.q_stat());
    if p == T::zero() || p < opts.degenerate_threshold * q {
        Ok((solve_degenerate(pq0, data, hp, times)?, SolutionKind::Degenerate))
    } else {
        Ok((solve_trajectory(pq0, data, hp, times)?, SolutionKind::Regular))
    }
}

/// Closed-form trajectory from a weight state; a sample at the state's own
/// time returns that state unchanged.
pub fn solve_from_state<T: Real>(
    init: &WeightState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    times: &[T],
    opts: &SolveOptions<T>,
) -> Result<(Trajectory<T>, SolutionKind)> {
    let pq0 = to_pq(init, data, hp)?;
    let shifted: Vec<T> = times.iter().map(|&t| t - init.t).collect();
    let (mut traj, kind) = solve(&pq0, data, hp, &shifted, opts)?;
    for (state, &t) in traj.states.iter_mut().zip(times) {
        state.t = t;
    }
    if let Some(pos) = times.iter().position(|&t| t == init.t) {
        traj.states[pos] = init.clone();
    }
    let traj = Trajectory::from_states(traj.states, data, hp)?;
    Ok((traj, kind))
}

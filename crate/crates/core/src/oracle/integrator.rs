//! Explicit Runge–Kutta integration of `dy/dt = f(t, y)` sampled at
//! prescribed times. Steps are clipped so every sample time is hit exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classic fourth-order Runge–Kutta with step `max_step`.
    FixedRk4,
    /// Dormand–Prince 5(4) with embedded error control.
    AdaptiveDopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig<T> {
    pub method: Method,
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the step; the step itself for [`Method::FixedRk4`].
    pub max_step: T,
    pub t_end: T,
    /// Stop once `|f(x) − y|` drops below this value.
    pub stop_residual: Option<T>,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(t_end: T) -> Self {
        Self {
            method: Method::AdaptiveDopri5,
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_step: T::infinity(),
            t_end,
            stop_residual: Some(T::lit(1e-12)),
        }
    }

    pub fn fixed_rk4(t_end: T, step: T) -> Self {
        Self { method: Method::FixedRk4, max_step: step, stop_residual: None, ..Self::new(t_end) }
    }

    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig("t_end must be positive and finite".into()));
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if self.method == Method::FixedRk4 && !self.max_step.is_finite() {
            return Err(Error::InvalidConfig("fixed-step integration needs a finite max_step".into()));
        }
        Ok(())
    }
}

/// States at each sample time, plus the time integration stopped early, if it did.
pub(crate) struct Samples<T> {
    pub states: Vec<Vec<T>>,
    pub stopped_at: Option<T>,
}

const MAX_STEPS: usize = 50_000_000;

/// Integrates from `(t0, y0)` and records the state at each of `times`
/// (ascending, all `>= t0`). `stop` is checked after every accepted step; once
/// it fires the current state is held for the remaining samples.
pub(crate) fn integrate_samples<T, F, S>(
    mut rhs: F,
    t0: T,
    y0: &[T],
    times: &[T],
    cfg: &IntegratorConfig<T>,
    mut stop: S,
) -> Result<Samples<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    S: FnMut(T, &[T]) -> bool,
{
    cfg.validate()?;
    if times.iter().any(|&t| t < t0) || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("sample times must ascend from the initial time".into()));
    }
    let mut states = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut pending = times.iter().copied().peekable();
    while pending.peek() == Some(&t0) {
        states.push(y.clone());
        pending.next();
    }
    if stop(t, &y) {
        states.extend(pending.map(|_| y.clone()));
        return Ok(Samples { states, stopped_at: Some(t) });
    }
    let mut stepper = Stepper::new(y.len());
    let mut h = match cfg.method {
        Method::FixedRk4 => cfg.max_step,
        Method::AdaptiveDopri5 => {
            let horizon = times.last().map_or(cfg.t_end, |&l| l) - t0;
            stepper.initial_step(&mut rhs, t, &y, cfg, horizon)?
        }
    };
    let mut steps = 0usize;
    while let Some(&target) = pending.peek() {
        match cfg.method {
            Method::FixedRk4 => {
                let span = target - t;
                let n = (span / cfg.max_step).ceil().max(T::one());
                let hh = span / n;
                let n = n.to_usize().unwrap_or(usize::MAX);
                for k in 0..n {
                    stepper.rk4(&mut rhs, t, &mut y, hh)?;
                    t = if k + 1 == n { target } else { t + hh };
                    steps += 1;
                    if stop(t, &y) {
                        states.extend(pending.map(|_| y.clone()));
                        return Ok(Samples { states, stopped_at: Some(t) });
                    }
                }
            }
            Method::AdaptiveDopri5 => {
                let mut hit = false;
                while !hit {
                    let room = target - t;
                    let mut step = h.min(cfg.max_step);
                    if step >= room {
                        step = room;
                        hit = true;
                    }
                    let floor = T::epsilon() * T::lit(16.0) * t.abs().max(T::min_positive_value());
                    if step <= floor {
                        return Err(Error::Stiffness { t: t.to_f64_lossy() });
                    }
                    let (err, y_new) = stepper.dopri5(&mut rhs, t, &y, step, cfg)?;
                    let factor = if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * err.powf(-T::lit(0.2))).max(T::lit(0.2)).min(T::lit(5.0))
                    };
                    steps += 1;
                    if steps > MAX_STEPS {
                        return Err(Error::Stiffness { t: t.to_f64_lossy() });
                    }
                    if err <= T::one() && err.is_finite() {
                        t = if hit { target } else { t + step };
                        y = y_new;
                        stepper.accept();
                        // a clipped step says nothing about the proposal
                        if !hit || factor < T::one() {
                            h = step * factor;
                        }
                        if stop(t, &y) {
                            states.extend(pending.map(|_| y.clone()));
                            return Ok(Samples { states, stopped_at: Some(t) });
                        }
                    } else {
                        hit = false;
                        h = step * factor.min(T::one());
                    }
                }
            }
        }
        states.push(y.clone());
        pending.next();
    }
    Ok(Samples { states, stopped_at: None })
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<T> {
    k: Vec<Vec<T>>,
    tmp: Vec<T>,
    /// First stage of the next step (FSAL) is valid.
    fsal: bool,
}

impl<T: Real> Stepper<T> {
    fn new(n: usize) -> Self {
        Self { k: vec![vec![T::zero(); n]; 7], tmp: vec![T::zero(); n], fsal: false }
    }

    fn initial_step<F>(&mut self, rhs: &mut F, t: T, y: &[T], cfg: &IntegratorConfig<T>, horizon: T) -> Result<T>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        let n = y.len();
        rhs(t, y, &mut self.k[0])?;
        let sc: Vec<T> = y.iter().map(|&v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
        let rms = |v: &[T]| {
            (v.iter().zip(&sc).map(|(&a, &s)| (a / s) * (a / s)).sum::<T>() / T::from_usize_lossy(n)).sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(&self.k[0]);
        let small = T::lit(1e-5);
        let mut h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
        h0 = h0.min(horizon).min(cfg.max_step);
        for i in 0..n {
            self.tmp[i] = y[i] + h0 * self.k[0][i];
        }
        let (first, rest) = self.k.split_at_mut(1);
        rhs(t + h0, &self.tmp, &mut rest[0])?;
        let diff: Vec<T> = rest[0].iter().zip(&first[0]).map(|(&a, &b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dm).powf(T::lit(0.2))
        };
        self.fsal = true;
        Ok((T::lit(100.0) * h0).min(h1).min(horizon).min(cfg.max_step))
    }

    fn accept(&mut self) {
        self.k.swap(0, 6);
        self.fsal = true;
    }

    /// One Dormand–Prince step; returns the scaled error norm and the proposal.
    fn dopri5<F>(&mut self, rhs: &mut F, t: T, y: &[T], h: T, cfg: &IntegratorConfig<T>) -> Result<(T, Vec<T>)>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        let n = y.len();
        if !self.fsal {
            rhs(t, y, &mut self.k[0])?;
            self.fsal = true;
        }
        for s in 0..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for (j, &a) in A[s].iter().enumerate().take(s + 1) {
                    if a != 0.0 {
                        acc = acc + T::lit(a) * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (done, rest) = self.k.split_at_mut(s + 1);
            let _ = done;
            rhs(t + h * T::lit(C[s]), &self.tmp, &mut rest[0])?;
        }
        // stage 6 was evaluated at the fifth-order solution held in tmp
        let y_new = self.tmp.clone();
        let mut sum = T::zero();
        for i in 0..n {
            let mut e = T::zero();
            for (j, &c) in E.iter().enumerate() {
                if c != 0.0 {
                    e = e + T::lit(c) * self.k[j][i];
                }
            }
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            sum = sum + r * r;
        }
        Ok(((sum / T::from_usize_lossy(n.max(1))).sqrt(), y_new))
    }

    fn rk4<F>(&mut self, rhs: &mut F, t: T, y: &mut [T], h: T) -> Result<()>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        let n = y.len();
        let half = h * T::lit(0.5);
        rhs(t, y, &mut self.k[0])?;
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k[0][i];
        }
        rhs(t + half, &self.tmp, &mut self.k[1])?;
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k[1][i];
        }
        rhs(t + half, &self.tmp, &mut self.k[2])?;
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k[2][i];
        }
        rhs(t + h, &self.tmp, &mut self.k[3])?;
        let sixth = h / T::lit(6.0);
        for i in 0..n {
            y[i] = y[i]
                + sixth * (self.k[0][i] + T::lit(2.0) * (self.k[1][i] + self.k[2][i]) + self.k[3][i]);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = -y[0];
        dy[1] = y[0] - 0.5 * y[1];
        Ok(())
    }

    fn exact(t: f64) -> [f64; 2] {
        // y1' = y0 - y1/2 with y0 = e^{-t}: y1 = -2e^{-t} + 3e^{-t/2}
        [(-t).exp(), -2.0 * (-t).exp() + 3.0 * (-0.5 * t).exp()]
    }

    #[test]
    fn adaptive_hits_sample_times_accurately() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let cfg = IntegratorConfig { stop_residual: None, ..IntegratorConfig::new(10.0) };
        let out = integrate_samples(decay, 0.0, &[1.0, 1.0], &times, &cfg, |_, _| false).unwrap();
        assert_eq!(out.states.len(), times.len());
        for (t, y) in times.iter().zip(&out.states) {
            let e = exact(*t);
            assert!((y[0] - e[0]).abs() < 1e-9 && (y[1] - e[1]).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let cfg = IntegratorConfig::fixed_rk4(2.0, h);
            let out = integrate_samples(decay, 0.0, &[1.0, 1.0], &[2.0], &cfg, |_, _| false).unwrap();
            let e = exact(2.0);
            (out.states[0][0] - e[0]).abs().max((out.states[0][1] - e[1]).abs())
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 16.0 / 1.5, "ratio = {ratio}");
    }

    #[test]
    fn stop_holds_state() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let cfg = IntegratorConfig::new(3.0);
        let out = integrate_samples(decay, 0.0, &[1.0, 1.0], &times, &cfg, |t, _| t > 0.5).unwrap();
        assert!(out.stopped_at.unwrap() > 0.5);
        assert_eq!(out.states[1], out.states[3]);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = IntegratorConfig::new(1.0);
        cfg.rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        assert!(IntegratorConfig::<f64>::new(-1.0).validate().is_err());
    }

    #[test]
    fn blow_up_is_reported_as_stiffness() {
        // y' = y², y(0) = 1 blows up at t = 1
        let cfg = IntegratorConfig { stop_residual: None, ..IntegratorConfig::new(2.0) };
        let res = integrate_samples(
            |_, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            &[2.0],
            &cfg,
            |_, _| false,
        );
        assert!(matches!(res, Err(Error::Stiffness { .. })));
    }
}

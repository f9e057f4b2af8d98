//! Reduction of the general-β flow to a single scalar ODE.
//!
//! Per neuron, `dp_i/dt = p_i (p_i + c_i/p_i)^{β−1} G(t)` with a factor `G`
//! shared by all neurons. With the antiderivative
//!
//! ```text
//! F_i(x) = ∫_{p_i(0)}^{x} s^{β−2} / (s² + c_i)^{β−1} ds
//! ```
//!
//! every `F_i(p_i(t))` equals the same shift `Δ(t)`, `dΔ/dt = G`, so one scalar
//! equation drives the whole network.

use crate::dynamics::pq::{from_pq, PQState};
use crate::dynamics::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::model::{EffectiveData, Hyperparams};
use crate::oracle::integrator::{integrate_samples, IntegratorConfig};
use crate::oracle::quad;
use crate::oracle::root::newton_bisect;
use crate::scalar::Real;

/// `F(x) = ∫_{x_ref}^{x} s^{β−2}/(s² + c)^{β−1} ds` on the monotone branch containing `x_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Antiderivative<T> {
    c: T,
    beta: u32,
    x_ref: T,
}

impl<T: Real> Antiderivative<T> {
    pub fn new(c: T, beta: u32, x_ref: T) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidHyperparams("beta must be >= 1".into()));
        }
        if x_ref == T::zero() || !x_ref.is_finite() {
            return Err(Error::Branch("reference point must be nonzero".into()));
        }
        if beta >= 2 && x_ref * x_ref + c == T::zero() {
            return Err(Error::Branch("reference point sits on the singularity x² = −c".into()));
        }
        Ok(Self { c, beta, x_ref })
    }

    pub fn integrand(&self, x: T) -> T {
        if self.beta == 1 {
            return x.recip();
        }
        let b = self.beta as i32;
        x.powi(b - 2) / (x * x + self.c).powi(b - 1)
    }

    /// Open range `(lo, hi)` of `|x|` on the branch; the sign is that of `x_ref`.
    pub fn branch(&self) -> (T, T) {
        if self.beta >= 2 && self.c < T::zero() {
            let r0 = (-self.c).sqrt();
            if self.x_ref.abs() > r0 {
                (r0, T::infinity())
            } else {
                (T::zero(), r0)
            }
        } else {
            (T::zero(), T::infinity())
        }
    }

    pub fn contains(&self, x: T) -> bool {
        let (lo, hi) = self.branch();
        x.signum() == self.x_ref.signum() && x.abs() > lo && x.abs() < hi
    }

    pub fn eval(&self, x: T) -> Result<T> {
        if !self.contains(x) {
            return Err(Error::Branch(format!("x = {x} is outside the branch of x_ref = {}", self.x_ref)));
        }
        if self.beta == 1 {
            return Ok((x / self.x_ref).ln());
        }
        if self.c == T::zero() {
            let e = 1 - self.beta as i32;
            return Ok((x.powi(e) - self.x_ref.powi(e)) / T::from_i32(e).expect("small int"));
        }
        let q = quad::integrate(|s| self.integrand(s), self.x_ref, x, T::lit(1e-15), T::lit(1e-14))?;
        Ok(q.value)
    }

    /// Solves `F(x) = v` on the branch, starting the search from `guess`.
    pub fn inverse(&self, v: T, guess: Option<T>) -> Result<T> {
        if v == T::zero() {
            return Ok(self.x_ref);
        }
        let sigma = self.x_ref.signum();
        if self.beta == 1 {
            let x = self.x_ref * v.exp();
            return if x.is_finite() && x != T::zero() { Ok(x) } else { Err(self.out_of_range(v)) };
        }
        if self.c == T::zero() {
            let e = 1 - self.beta as i32;
            let et = T::from_i32(e).expect("small int");
            let z = self.x_ref.powi(e) + et * v;
            if z.signum() != self.x_ref.powi(e).signum() || z == T::zero() || !z.is_finite() {
                return Err(self.out_of_range(v));
            }
            return Ok(sigma * z.abs().powf(et.recip()));
        }
        let (lo, hi) = self.branch();
        let inside = |m: T| m > lo && m < hi && m.is_finite();
        let resid = |m: T| -> Result<(T, T)> { Ok((self.eval(sigma * m)? - v, sigma * self.integrand(sigma * m))) };
        let mut m0 = guess.filter(|g| self.contains(*g)).map_or(self.x_ref.abs(), |g| g.abs());
        let (mut g0, mut d0) = resid(m0)?;
        if g0 == T::zero() {
            return Ok(sigma * m0);
        }
        let increasing = d0 > T::zero();
        let up = (g0 < T::zero()) == increasing;
        // first probe: slightly overshooting Newton step
        let newton = m0 - T::lit(1.5) * g0 / d0;
        let mut probe = if (newton > m0) == up && inside(newton) { newton } else { self.expand(m0, up) };
        for _ in 0..1100 {
            if probe == m0 {
                // the root is within one ulp of m0
                return Ok(sigma * m0);
            }
            if !inside(probe) {
                if self.toward_singularity(up) {
                    // F diverges at ±√(−c): the target lies closer than double precision resolves
                    return Ok(sigma * m0);
                }
                break;
            }
            let (gp, dp) = resid(probe)?;
            if gp == T::zero() {
                return Ok(sigma * probe);
            }
            if gp.signum() != g0.signum() {
                let start = m0 - g0 / d0;
                let m = newton_bisect(resid, m0, probe, start, T::lit(1e-15))?;
                return Ok(sigma * m);
            }
            (m0, g0, d0) = (probe, gp, dp);
            probe = self.expand(m0, up);
        }
        Err(self.out_of_range(v))
    }

    fn toward_singularity(&self, up: bool) -> bool {
        if self.beta < 2 || self.c >= T::zero() {
            return false;
        }
        let r0 = (-self.c).sqrt();
        let (lo, hi) = self.branch();
        if up { hi == r0 } else { lo == r0 }
    }

    fn expand(&self, m: T, up: bool) -> T {
        let (lo, hi) = self.branch();
        let half = T::lit(0.5);
        match (up, hi.is_finite()) {
            (true, true) => m + (hi - m) * half,
            (true, false) => m + m,
            (false, _) => lo + (m - lo) * half,
        }
    }

    fn out_of_range(&self, v: T) -> Error {
        Error::Branch(format!("F(x) = {v} is not attained on the branch of x_ref = {}", self.x_ref))
    }
}

/// `F(x)` for conserved product `c` with reference point `x_ref`.
pub fn f_integral<T: Real>(x: T, c: T, beta: u32, x_ref: T) -> Result<T> {
    Antiderivative::new(c, beta, x_ref)?.eval(x)
}

/// Inverse of [`f_integral`] on the branch containing `x_ref`.
pub fn f_inverse<T: Real>(v: T, c: T, beta: u32, x_ref: T) -> Result<T> {
    Antiderivative::new(c, beta, x_ref)?.inverse(v, None)
}

#[derive(Debug, Clone, Copy)]
enum Track<T> {
    /// `p = F⁻¹(Δ)`, `q = c/p`.
    ViaP(Antiderivative<T>),
    /// `p ≡ 0` and `q = F⁻¹(−Δ)` with `c = 0`.
    ViaQ(Antiderivative<T>),
    /// The pre-activation is zero and β ≥ 2: the neuron never moves.
    Frozen,
}

/// Result of [`integrate_reduced`]: the trajectory and the shift `Δ(t)` at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRun<T> {
    pub trajectory: Trajectory<T>,
    pub delta: Vec<T>,
}

struct Network<'a, T> {
    tracks: Vec<Track<T>>,
    pq0: &'a PQState<T>,
    /// Last recovered coordinate per neuron, used to warm-start the inversions.
    cache: Vec<T>,
}

impl<T: Real> Network<'_, T> {
    fn coords(&mut self, delta: T) -> Result<(Vec<T>, Vec<T>)> {
        let d = self.tracks.len();
        let (mut p, mut q) = (Vec::with_capacity(d), Vec::with_capacity(d));
        for (i, track) in self.tracks.iter().enumerate() {
            match track {
                Track::ViaP(f) => {
                    let x = f.inverse(delta, Some(self.cache[i]))?;
                    self.cache[i] = x;
                    p.push(x);
                    q.push(self.pq0.c()[i] / x);
                }
                Track::ViaQ(f) => {
                    let x = f.inverse(-delta, Some(self.cache[i]))?;
                    self.cache[i] = x;
                    p.push(T::zero());
                    q.push(x);
                }
                Track::Frozen => {
                    p.push(self.pq0.p[i]);
                    q.push(self.pq0.q[i]);
                }
            }
        }
        Ok((p, q))
    }
}

/// Integrates `dΔ/dt = G(t)` and rebuilds the network from `Δ` at each sample time.
pub fn integrate_reduced<T: Real>(
    pq0: &PQState<T>,
    data: &EffectiveData<T>,
    hp: &Hyperparams<T>,
    cfg: &IntegratorConfig<T>,
    times: &[T],
) -> Result<ReducedRun<T>> {
    hp.validate()?;
    if pq0.d() != hp.d {
        return Err(Error::DimensionMismatch(format!("pq has width {}, d = {}", pq0.d(), hp.d)));
    }
    let rho = data.norm();
    if rho == T::zero() {
        return Err(Error::DegenerateData);
    }
    let tracks = pq0
        .p
        .iter()
        .zip(&pq0.q)
        .zip(pq0.c())
        .map(|((&p, &q), &c)| {
            if hp.beta >= 2 && p + q == T::zero() {
                Ok(Track::Frozen)
            } else if p != T::zero() {
                Antiderivative::new(c, hp.beta, p).map(Track::ViaP)
            } else if q != T::zero() {
                Antiderivative::new(T::zero(), hp.beta, q).map(Track::ViaQ)
            } else {
                Ok(Track::Frozen)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let cache = pq0.p.iter().zip(&pq0.q).map(|(&p, &q)| if p != T::zero() { p } else { q }).collect();
    let mut net = Network { tracks, pq0, cache };

    let beta = hp.beta as i32;
    let sw = (hp.beta_t() * hp.eta_w).sqrt();
    let su = hp.eta_u.sqrt();
    let scale = rho / su;
    let drive = -T::lit(2.0) * hp.gamma * (hp.beta_t() * hp.eta_u * hp.eta_w).sqrt() * rho * scale.powi(beta - 1);
    let residual = |p: &[T], q: &[T]| {
        let f: T = p.iter().zip(q).map(|(&p, &q)| (p - q) / sw * ((p + q) * scale).powi(beta)).sum();
        hp.gamma * f - data.y
    };

    let tol = cfg.stop_residual;
    let mut failure = None;
    let mut stop_net = Network { tracks: net.tracks.clone(), pq0, cache: net.cache.clone() };
    let out = integrate_samples(
        |_, y, dy| {
            let (p, q) = net.coords(y[0])?;
            dy[0] = drive * residual(&p, &q);
            Ok(())
        },
        T::zero(),
        &[T::zero()],
        times,
        cfg,
        |_, y| match (tol, stop_net.coords(y[0])) {
            (Some(tol), Ok((p, q))) => residual(&p, &q).abs() < tol,
            (_, Err(e)) => {
                failure = Some(e);
                true
            }
            _ => false,
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut rebuild = Network { tracks: stop_net.tracks, pq0, cache: stop_net.cache };
    let delta: Vec<T> = out.states.iter().map(|y| y[0]).collect();
    let states = delta
        .iter()
        .zip(times)
        .map(|(&dl, &t)| {
            let (p, q) = rebuild.coords(dl)?;
            from_pq(&pq0.with_coords(p, q), data, hp, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trajectory = Trajectory::from_states(states, data, hp)?;
    trajectory.converged_at = out.stopped_at;
    Ok(ReducedRun { trajectory, delta })
}

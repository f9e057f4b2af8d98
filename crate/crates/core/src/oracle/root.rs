//! Newton iteration safeguarded by bisection.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Root of `g` in the bracket `[a, b]` where `g(a)` and `g(b)` differ in sign.
/// `g` returns the value and derivative.
pub fn newton_bisect<T: Real, G>(mut g: G, mut a: T, mut b: T, guess: T, x_tol: T) -> Result<T>
where
    G: FnMut(T) -> Result<(T, T)>,
{
    let (ga, _) = g(a)?;
    let (gb, _) = g(b)?;
    if ga == T::zero() {
        return Ok(a);
    }
    if gb == T::zero() {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::Branch("root is not bracketed".into()));
    }
    // orient so that g(a) < 0 < g(b)
    if ga > T::zero() {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x = if guess > a.min(b) && guess < a.max(b) { guess } else { (a + b) * T::lit(0.5) };
    for _ in 0..200 {
        let (gx, dg) = g(x)?;
        if gx == T::zero() {
            return Ok(x);
        }
        if gx < T::zero() {
            a = x;
        } else {
            b = x;
        }
        let newton = x - gx / dg;
        let inside = newton.is_finite() && newton > a.min(b) && newton < a.max(b);
        let next = if inside { newton } else { (a + b) * T::lit(0.5) };
        if (next - x).abs() <= x_tol * x.abs().max(T::one()) || (a - b).abs() <= x_tol * x.abs().max(T::one()) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

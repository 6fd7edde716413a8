//! Bracketed scalar root finding: Newton steps guarded by bisection.

use crate::error::Error;

pub const MAX_ITERATIONS: usize = 400;

/// Finds the root of a function that is increasing on `[lo, hi]` with
/// `f(lo) ≤ 0 ≤ f(hi)`.
///
/// Each iteration tries a Newton step from the current iterate and falls
/// back to bisection whenever the step leaves the bracket or fails to halve
/// it. Stops once `|f| ≤ f_tol` or the bracket collapses to adjacent floats.
pub fn increasing_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, f_tol: f64) -> Result<f64, Error>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    if f_lo >= 0.0 {
        return if f_lo <= f_tol {
            Ok(lo)
        } else {
            Err(Error::NoConvergence(format!("f(lo) = {f_lo:e} > 0, root not bracketed")))
        };
    }
    let f_hi = f(hi);
    if f_hi < 0.0 {
        return Err(Error::NoConvergence(format!("f(hi) = {f_hi:e} < 0, root not bracketed")));
    }

    let mut x = 0.5 * (lo + hi);
    let mut last_width = hi - lo;
    for _ in 0..MAX_ITERATIONS {
        let fx = f(x);
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= f64::EPSILON * hi.abs().max(lo.abs()) || width == 0.0 {
            return Ok(if f(hi).abs() < f(lo).abs() { hi } else { lo });
        }
        let d = df(x);
        let newton = x - fx / d;
        let use_newton = d.is_finite() && d > 0.0 && newton > lo && newton < hi && width < 0.5 * last_width;
        last_width = width;
        x = if use_newton { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence(format!(
        "no convergence after {MAX_ITERATIONS} iterations, bracket [{lo:e}, {hi:e}]"
    )))
}

/// Plain bisection on an increasing function; used as an independent check
/// of [`increasing_root`].
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iterations: usize) -> f64 {
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = increasing_root(|x| x * x * x - 2.0, |x| 3.0 * x * x, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn steep_near_pole() {
        // x / sqrt(1 - x²) = 1e6 has its root extremely close to 1.
        let target = 1e6;
        let f = |x: f64| x / (1.0 - x * x).sqrt() - target;
        let df = |x: f64| (1.0 - x * x).powf(-1.5);
        let r = increasing_root(f, df, 0.0, 1.0 - 1e-15, 1e-14 * target).unwrap();
        let exact = target / (1.0 + target * target).sqrt();
        assert!((r - exact).abs() < 1e-15);
    }

    #[test]
    fn unbracketed_is_reported() {
        assert!(increasing_root(|x| x + 1.0, |_| 1.0, 0.0, 1.0, 1e-12).is_err());
        assert!(increasing_root(|x| x - 5.0, |_| 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn bisection_agrees() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}

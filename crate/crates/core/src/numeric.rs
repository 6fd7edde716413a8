//! Quadrature and finite differences used by the dynamics audits.

use crate::types::Vec3;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Time derivative of sampled vectors: central differences at interior
/// samples, second-order one-sided differences at both ends.
pub fn derivative(times: &[f64], samples: &[Vec3]) -> Vec<Vec3> {
    assert_eq!(times.len(), samples.len());
    let n = samples.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![Vec3::zeros()],
        2 => {
            let d = (samples[1] - samples[0]) / (times[1] - times[0]);
            return vec![d, d];
        }
        _ => {}
    }
    let mut out = Vec::with_capacity(n);
    out.push(one_sided(times[0], times[1], times[2], &samples[0], &samples[1], &samples[2]));
    for i in 1..n - 1 {
        out.push((samples[i + 1] - samples[i - 1]) / (times[i + 1] - times[i - 1]));
    }
    out.push(one_sided(
        times[n - 1],
        times[n - 2],
        times[n - 3],
        &samples[n - 1],
        &samples[n - 2],
        &samples[n - 3],
    ));
    out
}

/// Derivative at `t0` of the parabola through three samples.
fn one_sided(t0: f64, t1: f64, t2: f64, y0: &Vec3, y1: &Vec3, y2: &Vec3) -> Vec3 {
    let h1 = t1 - t0;
    let h2 = t2 - t0;
    // Lagrange weights of d/dt at t0
    let w0 = -(h1 + h2) / (h1 * h2);
    let w1 = h2 / (h1 * (h2 - h1));
    let w2 = -h1 / (h2 * (h2 - h1));
    y0 * w0 + y1 * w1 + y2 * w2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_smooth() {
        let v = adaptive_simpson(&|x: f64| x * x * x - x, 0.0, 2.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let times: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let samples: Vec<Vec3> = times.iter().map(|t| Vec3::new(t * t, 3.0 * t, 1.0)).collect();
        let d = derivative(&times, &samples);
        for (t, di) in times.iter().zip(&d) {
            assert!((di - Vec3::new(2.0 * t, 3.0, 0.0)).amax() < 1e-12, "{t}: {di:?}");
        }
    }

    #[test]
    fn central_difference_is_second_order() {
        let err = |h: f64| {
            let times = [1.0 - h, 1.0, 1.0 + h];
            let s: Vec<Vec3> = times.iter().map(|t| Vec3::new(t.exp(), 0.0, 0.0)).collect();
            (derivative(&times, &s)[1].x - 1f64.exp()).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }
}

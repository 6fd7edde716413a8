//! Integration of the paired equations of motion
//!
//! ```text
//! m_A ẍ_A = f,    m_B ẍ_B = k
//! ```
//!
//! and the observables whose conservation the audits check: total momentum,
//! internal angular momentum `x_AB × μ v_AB` and internal energy
//! `½ μ ‖v_AB‖² + V(‖x_AB‖)`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::forces::{Charges, ForceLaw};
use crate::numeric::{adaptive_simpson, derivative};
use crate::types::{cross, pair_state, reduced_mass, Body, PairState, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    /// Velocity Verlet, for velocity-independent forces only.
    Verlet,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Verlet => "verlet",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "verlet" => Ok(Method::Verlet),
            other => Err(Error::InvalidIntegration(format!("unknown method `{other}` (expected rk4 or verlet)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<(Body, Body)>,
    pub law: ForceLaw,
    pub method: Method,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub total_momentum: Vec3,
    pub angular_momentum: Vec3,
    /// Absent for laws without an energy integral.
    pub internal_energy: Option<f64>,
    pub reduced_mass: f64,
}

#[derive(Clone, Copy)]
struct State {
    xa: Vec3,
    va: Vec3,
    xb: Vec3,
    vb: Vec3,
}

struct System<'a> {
    a: &'a Body,
    b: &'a Body,
    law: &'a ForceLaw,
}

impl System<'_> {
    fn accelerations(&self, s: &State) -> Result<(Vec3, Vec3), Error> {
        let a = self.a.with_state(s.xa, s.va);
        let b = self.b.with_state(s.xb, s.vb);
        let (f, k) = self.law.force_pair(&a, &b)?;
        Ok((f / self.a.mass(), k / self.b.mass()))
    }

    fn rk4(&self, s: &State, h: f64) -> Result<State, Error> {
        let deriv = |s: &State| -> Result<State, Error> {
            let (aa, ab) = self.accelerations(s)?;
            Ok(State {
                xa: s.va,
                va: aa,
                xb: s.vb,
                vb: ab,
            })
        };
        let shifted = |s: &State, d: &State, c: f64| State {
            xa: s.xa + d.xa * c,
            va: s.va + d.va * c,
            xb: s.xb + d.xb * c,
            vb: s.vb + d.vb * c,
        };
        let k1 = deriv(s)?;
        let k2 = deriv(&shifted(s, &k1, 0.5 * h))?;
        let k3 = deriv(&shifted(s, &k2, 0.5 * h))?;
        let k4 = deriv(&shifted(s, &k3, h))?;
        let w = h / 6.0;
        Ok(State {
            xa: s.xa + (k1.xa + (k2.xa + k3.xa) * 2.0 + k4.xa) * w,
            va: s.va + (k1.va + (k2.va + k3.va) * 2.0 + k4.va) * w,
            xb: s.xb + (k1.xb + (k2.xb + k3.xb) * 2.0 + k4.xb) * w,
            vb: s.vb + (k1.vb + (k2.vb + k3.vb) * 2.0 + k4.vb) * w,
        })
    }

    fn verlet(&self, s: &State, acc: (Vec3, Vec3), h: f64) -> Result<(State, (Vec3, Vec3)), Error> {
        let va_half = s.va + acc.0 * (0.5 * h);
        let vb_half = s.vb + acc.1 * (0.5 * h);
        let mut next = State {
            xa: s.xa + va_half * h,
            va: va_half,
            xb: s.xb + vb_half * h,
            vb: vb_half,
        };
        let acc_next = self.accelerations(&next)?;
        next.va = va_half + acc_next.0 * (0.5 * h);
        next.vb = vb_half + acc_next.1 * (0.5 * h);
        Ok((next, acc_next))
    }
}

/// Integrates the pair from `t = 0` to `t_end` with fixed steps of `step`
/// (the last one shortened if `t_end` is not a multiple of `step`).
pub fn integrate(a0: &Body, b0: &Body, law: &ForceLaw, t_end: f64, step: f64, method: Method) -> Result<Trajectory, Error> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidIntegration(format!("step must be positive, got {step}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidIntegration(format!("t_end must be positive, got {t_end}")));
    }
    if method == Method::Verlet && !law.is_velocity_independent() {
        return Err(Error::VelocityDependentLaw { law: law.name().to_string() });
    }
    let system = System { a: a0, b: b0, law };
    let mut state = State {
        xa: a0.position,
        va: a0.velocity,
        xb: b0.position,
        vb: b0.velocity,
    };
    // Degenerate initial configurations fail here, before any stepping.
    let mut acc = system.accelerations(&state)?;

    let ratio = t_end / step;
    let n = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push((a0.clone(), b0.clone()));
    for i in 1..=n {
        let t = if i == n { t_end } else { i as f64 * step };
        let h = t - times[i - 1];
        state = match method {
            Method::Rk4 => system.rk4(&state, h)?,
            Method::Verlet => {
                let (next, next_acc) = system.verlet(&state, acc, h)?;
                acc = next_acc;
                next
            }
        };
        times.push(t);
        states.push((a0.with_state(state.xa, state.va), b0.with_state(state.xb, state.vb)));
    }
    Ok(Trajectory {
        times,
        states,
        law: law.clone(),
        method,
        step,
    })
}

/// Internal potential `V(‖x_AB‖)` with `−∇V = h·x_AB`, or `None` for a law
/// that is not central. Uses the law's closed form when registered,
/// otherwise `V(r) = −∫_{r0}^{r} h(s)·s ds`.
pub fn potential(law: &ForceLaw, a: &Body, b: &Body) -> Result<Option<f64>, Error> {
    if !law.is_central() {
        return Ok(None);
    }
    let ca = Charges::of(a);
    let cb = Charges::of(b);
    let pair = pair_state(a, b);
    let r = law.invariants(&pair)?.distance;
    if let Some(v) = law.closed_form_potential(&ca, &cb, r) {
        return Ok(Some(v));
    }
    if law.radial_profile(&ca, &cb, r).is_none() {
        // the empty law
        return Ok(Some(0.0));
    }
    Ok(Some(quadrature_potential(law, &ca, &cb, r)))
}

pub(crate) fn quadrature_potential(law: &ForceLaw, a: &Charges, b: &Charges, r: f64) -> f64 {
    let r0 = law.reference_radius();
    let integrand = |s: f64| law.radial_profile(a, b, s).unwrap_or(0.0) * s;
    let scale = integrand(r).abs().max(integrand(r0).abs()).max(1e-300);
    -adaptive_simpson(&integrand, r0, r, 1e-13 * scale * (r - r0).abs().max(1.0))
}

pub fn observables(a: &Body, b: &Body, law: &ForceLaw) -> Result<Observables, Error> {
    let mu = reduced_mass(a, b);
    let pair = pair_state(a, b);
    let energy = potential(law, a, b)?.map(|v| 0.5 * mu * pair.v_ab.norm_squared() + v);
    Ok(Observables {
        total_momentum: a.momentum() + b.momentum(),
        angular_momentum: cross(&pair.x_ab, &(pair.v_ab * mu)),
        internal_energy: energy,
        reduced_mass: mu,
    })
}

/// `2 (x_AB × v_AB) φ_⊥`: the rate of change of total momentum.
pub fn momentum_rate(law: &ForceLaw, a: &Body, b: &Body) -> Result<Vec3, Error> {
    let pair = pair_state(a, b);
    let [_, _, pp] = law.coefficients(a, b)?;
    Ok(cross(&pair.x_ab, &pair.v_ab) * (2.0 * pp))
}

/// Torque on the internal angular momentum:
/// `x × (x φ_e + v φ_s) + (m_B − m_A)/(m_A + m_B) · x × (x × v) φ_⊥`.
pub fn torque(law: &ForceLaw, a: &Body, b: &Body) -> Result<Vec3, Error> {
    let pair = pair_state(a, b);
    let [pe, ps, pp] = law.coefficients(a, b)?;
    let x = pair.x_ab;
    let v = pair.v_ab;
    let asym = (b.mass() - a.mass()) / (a.mass() + b.mass());
    Ok(cross(&x, &(x * pe + v * ps)) + cross(&x, &cross(&x, &v)) * (asym * pp))
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn pair_states(&self) -> Vec<PairState> {
        self.states.iter().map(|(a, b)| pair_state(a, b)).collect()
    }

    pub fn observables(&self) -> Result<Vec<Observables>, Error> {
        self.states.iter().map(|(a, b)| observables(a, b, &self.law)).collect()
    }

    pub fn momenta(&self) -> Vec<Vec3> {
        self.states.iter().map(|(a, b)| a.momentum() + b.momentum()).collect()
    }

    pub fn angular_momenta(&self) -> Vec<Vec3> {
        self.states
            .iter()
            .map(|(a, b)| {
                let p = pair_state(a, b);
                cross(&p.x_ab, &(p.v_ab * reduced_mass(a, b)))
            })
            .collect()
    }

    /// Internal energy at every sample, `None` when undefined for the law.
    pub fn energies(&self) -> Result<Option<Vec<f64>>, Error> {
        if !self.law.is_central() {
            return Ok(None);
        }
        let obs = self.observables()?;
        Ok(Some(obs.iter().map(|o| o.internal_energy.unwrap_or(f64::NAN)).collect()))
    }

    /// Finite-difference dP/dt at every sample.
    pub fn momentum_derivative(&self) -> Vec<Vec3> {
        derivative(&self.times, &self.momenta())
    }

    pub fn angular_momentum_derivative(&self) -> Vec<Vec3> {
        derivative(&self.times, &self.angular_momenta())
    }

    /// Indices of samples with a full central-difference stencil on the
    /// uniform part of the grid.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let n = self.len();
        if n < 3 {
            return 0..0;
        }
        let last_uniform = if ((self.times[n - 1] - self.times[n - 2]) - self.step).abs() > 1e-9 * self.step {
            n - 2
        } else {
            n - 1
        };
        1..last_uniform
    }

    /// Applies a frame change sample by sample (each at its own time).
    pub fn transformed(&self, frame: &crate::frames::FrameTransform) -> Trajectory {
        let states = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(t, (a, b))| (frame.apply(a, *t), frame.apply(b, *t)))
            .collect();
        Trajectory {
            states,
            ..self.clone()
        }
    }

    /// Times strictly increasing and one state per time.
    pub fn is_well_ordered(&self) -> bool {
        self.times.len() == self.states.len() && self.times.windows(2).all(|w| w[0] < w[1])
    }
}

/// Elapsed time along a polyline, `∫ |dx| / |v|`.
///
/// `speed(i, s)` is the speed on segment `i` at fraction `s ∈ [0, 1]` of its
/// length; it must stay positive.
pub fn path_time<F>(path: &[Vec3], speed: F) -> Result<f64, Error>
where
    F: Fn(usize, f64) -> f64,
{
    if path.len() < 2 {
        return Ok(0.0);
    }
    let bad = std::cell::Cell::new(None);
    let mut total = 0.0;
    for (i, seg) in path.windows(2).enumerate() {
        let length = (seg[1] - seg[0]).norm();
        if length == 0.0 {
            continue;
        }
        let inv = |s: f64| {
            let v = speed(i, s);
            if !(v > 0.0 && v.is_finite()) {
                bad.set(Some((i, s, v)));
                return 0.0;
            }
            1.0 / v
        };
        total += length * adaptive_simpson(&inv, 0.0, 1.0, 1e-13);
        if let Some((i, s, v)) = bad.get() {
            return Err(Error::InvalidArgument(format!(
                "speed must be positive along the path, got {v} on segment {i} at {s}"
            )));
        }
    }
    Ok(total)
}

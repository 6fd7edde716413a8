//! Bounded velocity addition.
//!
//! Velocities live in the open ball `‖U‖ < C`. With `g(U) = G(‖U‖)` for a
//! strictly increasing `G` with `G(0) = 1` that diverges at `C`, the sum
//! `W = U ⊕ V` is the unique velocity with
//!
//! ```text
//! g(W)·W = g(U)·U + g(V)·V
//! ```
//!
//! so `U ↦ g(U)·U` maps the ball bijectively onto ℝ³ and carries ⊕ to
//! ordinary vector addition. Proper time is `T = t / g(V)`.

use std::fmt;

use crate::error::Error;
use crate::roots;
use crate::types::Vec3;

/// Relative tolerance on `w·G(w) = r` for the scalar root solve.
pub const SOLVE_TOL: f64 = 1e-15;

/// Admissible scaling functions. `Galilean` is `G ≡ 1` with no bound; its
/// `c` is only the signal speed used by the light-clock scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GFunction {
    /// `G(a) = 1/√(1 − (a/C)²)`
    Lorentz { c: f64 },
    /// `G(a) = 1/(1 − (a/C)²)`
    Rational { c: f64 },
    /// `G ≡ 1`
    Galilean { c: f64 },
}

impl fmt::Display for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GFunction::Lorentz { c } => write!(f, "lorentz(C={c})"),
            GFunction::Rational { c } => write!(f, "rational(C={c})"),
            GFunction::Galilean { c } => write!(f, "galilean(c={c})"),
        }
    }
}

impl GFunction {
    pub fn from_name(name: &str, c: f64) -> Result<Self, Error> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("limiting speed must be positive, got {c}")));
        }
        match name {
            "lorentz" => Ok(GFunction::Lorentz { c }),
            "rational" => Ok(GFunction::Rational { c }),
            "galilean" => Ok(GFunction::Galilean { c }),
            other => Err(Error::InvalidArgument(format!(
                "unknown G function `{other}` (expected lorentz, rational or galilean)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GFunction::Lorentz { .. } => "lorentz",
            GFunction::Rational { .. } => "rational",
            GFunction::Galilean { .. } => "galilean",
        }
    }

    /// The bound `C`, or `None` for the unbounded Galilean group.
    pub fn limit(&self) -> Option<f64> {
        match *self {
            GFunction::Lorentz { c } | GFunction::Rational { c } => Some(c),
            GFunction::Galilean { .. } => None,
        }
    }

    /// Speed of the signal in the light-clock scenario.
    pub fn signal_speed(&self) -> f64 {
        match *self {
            GFunction::Lorentz { c } | GFunction::Rational { c } | GFunction::Galilean { c } => c,
        }
    }

    /// `1 − (a/C)²`, factored to keep precision near the bound.
    fn gap(a: f64, c: f64) -> f64 {
        let s = a / c;
        (1.0 - s) * (1.0 + s)
    }

    /// `G(a)`; infinite at and beyond the bound.
    pub fn eval(&self, a: f64) -> f64 {
        match *self {
            GFunction::Lorentz { c } => {
                if a >= c {
                    f64::INFINITY
                } else {
                    1.0 / Self::gap(a, c).sqrt()
                }
            }
            GFunction::Rational { c } => {
                if a >= c {
                    f64::INFINITY
                } else {
                    1.0 / Self::gap(a, c)
                }
            }
            GFunction::Galilean { .. } => 1.0,
        }
    }

    /// `a·G(a)`
    pub fn scaled(&self, a: f64) -> f64 {
        a * self.eval(a)
    }

    /// `d(a·G(a))/da`
    pub fn scaled_derivative(&self, a: f64) -> f64 {
        match *self {
            GFunction::Lorentz { c } => Self::gap(a, c).powf(-1.5),
            GFunction::Rational { c } => {
                let s = a / c;
                let gap = Self::gap(a, c);
                (1.0 + s * s) / (gap * gap)
            }
            GFunction::Galilean { .. } => 1.0,
        }
    }

    /// Solves `w·G(w) = r` for `w ∈ [0, C)`, `r ≥ 0`.
    pub fn scaled_inverse(&self, r: f64) -> Result<f64, Error> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("cannot invert a·G(a) at {r}")));
        }
        let Some(c) = self.limit() else {
            return Ok(r);
        };
        if r == 0.0 {
            return Ok(0.0);
        }
        let f = |w: f64| self.scaled(w) - r;
        let df = |w: f64| self.scaled_derivative(w);
        let tol = SOLVE_TOL * r;
        let hi = c * (1.0 - 1e-15);
        if f(hi) >= 0.0 {
            return roots::increasing_root(f, df, 0.0, hi, tol);
        }
        // The root sits in the last few ulps below C.
        let top = prev_float(c);
        if f(top) >= 0.0 {
            return roots::increasing_root(f, df, hi, top, tol);
        }
        Err(Error::NoConvergence(format!(
            "a·G(a) = {r:e} is beyond what is representable below C = {c}"
        )))
    }
}

fn prev_float(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    f64::from_bits(x.to_bits() - 1)
}

/// A velocity strictly inside the ball of its group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedVelocity {
    v: Vec3,
    group: GFunction,
}

impl BoundedVelocity {
    pub fn new(v: Vec3, group: GFunction) -> Result<Self, Error> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("velocity must be finite".into()));
        }
        if let Some(c) = group.limit() {
            let speed = v.norm();
            if !(speed < c) {
                return Err(Error::SpeedOutOfRange { speed, limit: c });
            }
        }
        Ok(BoundedVelocity { v, group })
    }

    pub fn zero(group: GFunction) -> Self {
        BoundedVelocity { v: Vec3::zeros(), group }
    }

    pub fn vector(&self) -> Vec3 {
        self.v
    }

    pub fn speed(&self) -> f64 {
        self.v.norm()
    }

    pub fn group(&self) -> GFunction {
        self.group
    }

    /// `g(U)`
    pub fn g(&self) -> f64 {
        self.group.eval(self.speed())
    }

    /// `g(U)·U`, the vector on which ⊕ acts additively.
    pub fn scaled(&self) -> Vec3 {
        self.v * self.g()
    }

    /// The inverse element `−U`.
    pub fn neg(&self) -> Self {
        BoundedVelocity { v: -self.v, group: self.group }
    }

    /// `U ⊕ V`
    pub fn oplus(&self, other: &BoundedVelocity) -> Result<BoundedVelocity, Error> {
        if self.group != other.group {
            return Err(Error::MixedGroups {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        from_scaled(self.scaled() + other.scaled(), self.group)
    }

    /// Composition with a signal moving at the limiting speed along
    /// `direction`. In a bounded group `g` diverges at the bound, so the
    /// signal term dominates: the result moves at `C` along `direction`
    /// whatever `self` is. In the Galilean group it is plain addition.
    pub fn oplus_signal(&self, direction: &Vec3) -> Result<Vec3, Error> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("signal direction must be non-zero".into()));
        }
        let unit = direction / n;
        let c = self.group.signal_speed();
        Ok(match self.group.limit() {
            Some(_) => unit * c,
            None => unit * c + self.v,
        })
    }
}

/// The velocity `W` whose scaled vector `g(W)·W` equals `target`.
pub fn from_scaled(target: Vec3, group: GFunction) -> Result<BoundedVelocity, Error> {
    let r = target.norm();
    if r == 0.0 {
        return Ok(BoundedVelocity::zero(group));
    }
    let w = group.scaled_inverse(r)?;
    let mut v = target * (w / r);
    if let Some(c) = group.limit() {
        // rounding in the rescale may land on the bound
        while v.norm() >= c {
            v *= 1.0 - f64::EPSILON;
        }
    }
    Ok(BoundedVelocity { v, group })
}

/// `T = t / g(V)`
pub fn proper_time(dt: f64, v: &BoundedVelocity) -> f64 {
    dt / v.g()
}

/// Three observers: O moves with `V1 = V2 ⊕ V3` relative to S, with `V2`
/// relative to S′, and S′ moves with `V3` relative to S.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceCheck {
    pub v1: BoundedVelocity,
    /// Subjective intervals `Δt_i = ΔT·g(V_i)`.
    pub intervals: [f64; 3],
    /// ‖V1Δt1 − (V2Δt2 + V3Δt3)‖ with equal proper times.
    pub residual: f64,
    /// ‖V1Δt1‖ + ‖V2Δt2‖ + ‖V3Δt3‖
    pub scale: f64,
    /// Same residual after stretching ΔT₂ by `1 + perturbation`.
    pub perturbed_residual: f64,
    /// First-order prediction `perturbation·‖V2‖·Δt2`.
    pub predicted_perturbed: f64,
}

impl InvarianceCheck {
    /// Residual relative to `max(1, scale)`.
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.scale.max(1.0)
    }

    /// Relative mismatch between the perturbed residual and its prediction.
    pub fn perturbation_mismatch(&self) -> f64 {
        if self.predicted_perturbed == 0.0 {
            return if self.perturbed_residual == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (self.perturbed_residual - self.predicted_perturbed).abs() / self.predicted_perturbed
    }
}

/// Relative stretch applied to ΔT₂ for the converse direction.
pub const PROPER_TIME_PERTURBATION: f64 = 0.01;

/// Verifies that equal proper times give invariant distances
/// (`V1Δt1 = V2Δt2 + V3Δt3`) and that unequal ones break the identity.
pub fn check_invariance_theorem(v2: &BoundedVelocity, v3: &BoundedVelocity, dt_proper: f64) -> Result<InvarianceCheck, Error> {
    if !(dt_proper > 0.0 && dt_proper.is_finite()) {
        return Err(Error::InvalidArgument(format!("proper time interval must be positive, got {dt_proper}")));
    }
    let v1 = v2.oplus(v3)?;
    let dt = [dt_proper * v1.g(), dt_proper * v2.g(), dt_proper * v3.g()];
    let dx = v1.vector() * dt[0];
    let dx_prime = v2.vector() * dt[1];
    let d_ss = v3.vector() * dt[2];
    let residual = (dx - (dx_prime + d_ss)).norm();
    let scale = dx.norm() + dx_prime.norm() + d_ss.norm();

    let dt2_perturbed = dt[1] * (1.0 + PROPER_TIME_PERTURBATION);
    let perturbed_residual = (dx - (v2.vector() * dt2_perturbed + d_ss)).norm();
    let predicted_perturbed = PROPER_TIME_PERTURBATION * v2.speed() * dt[1];

    Ok(InvarianceCheck {
        v1,
        intervals: dt,
        residual,
        scale,
        perturbed_residual,
        predicted_perturbed,
    })
}

/// Outcome of one emission–reflection–detection cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct LightMeasurement {
    /// 2·baseline / (proper time elapsed at the source)
    pub quotient: f64,
    /// Signal speed relative to the apparatus on the outbound and return legs.
    pub leg_speeds: [f64; 2],
    /// Round-trip time in the apparatus frame.
    pub apparatus_time: f64,
    /// Round-trip time for the source as seen by the moving observer.
    pub observer_time: f64,
    /// Proper time of the source reconstructed by the observer.
    pub proper_time: f64,
}

/// Source and mirror at rest relative to each other, `baseline` apart
/// along `axis`. The signal moves at the group's signal speed relative to
/// the observer; the apparatus moves with `frame_boost` relative to the
/// observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightClock {
    pub baseline: f64,
    pub axis: Vec3,
}

impl LightClock {
    pub fn new(baseline: f64, axis: Vec3) -> Result<Self, Error> {
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::InvalidArgument(format!("baseline must be positive, got {baseline}")));
        }
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("light-clock axis must be non-zero".into()));
        }
        Ok(LightClock { baseline, axis: axis / n })
    }

    /// Speed, relative to the apparatus, of a signal sent along `dir` (unit)
    /// when the apparatus moves with `boost` through the observer's frame.
    fn leg_speed(&self, boost: &BoundedVelocity, dir: &Vec3) -> Result<f64, Error> {
        let group = boost.group();
        let c = group.signal_speed();
        let receding = boost.neg();
        match group.limit() {
            Some(_) => {
                // Any aim gives speed C in the apparatus frame; aim along the leg.
                let in_apparatus = receding.oplus_signal(dir)?;
                Ok(in_apparatus.dot(dir))
            }
            None => {
                // Aim so that (observer-frame signal) − boost points along dir:
                // |s·dir + u| = C, solved for s > 0.
                let u = boost.vector();
                if !(u.norm() < c) {
                    return Err(Error::InvalidArgument(format!(
                        "apparatus speed {} must stay below the signal speed {c}",
                        u.norm()
                    )));
                }
                let along = u.dot(dir);
                let lo = (-along).max(0.0);
                let hi = c + u.norm();
                let s = roots::increasing_root(
                    |s| (dir * s + u).norm() - c,
                    |s| (s + along) / (dir * s + u).norm(),
                    lo,
                    hi,
                    1e-15 * c,
                )?;
                let aim = dir * s + u;
                let in_apparatus = receding.oplus_signal(&aim)?;
                Ok(in_apparatus.dot(dir))
            }
        }
    }

    pub fn measure(&self, frame_boost: &BoundedVelocity) -> Result<LightMeasurement, Error> {
        let out = self.leg_speed(frame_boost, &self.axis)?;
        let back = self.leg_speed(frame_boost, &(-self.axis))?;
        if !(out > 0.0 && back > 0.0) {
            return Err(Error::InvalidArgument("signal cannot complete the round trip".into()));
        }
        let apparatus_time = self.baseline / out + self.baseline / back;
        // The source rests in the apparatus, so its proper time is the
        // apparatus time; seen from the observer it moves with 0 ⊕ boost.
        let at_rest = BoundedVelocity::zero(frame_boost.group());
        let source_proper = proper_time(apparatus_time, &at_rest);
        let source_velocity = at_rest.oplus(frame_boost)?;
        let observer_time = source_proper * source_velocity.g();
        let reconstructed = proper_time(observer_time, &source_velocity);
        Ok(LightMeasurement {
            quotient: 2.0 * self.baseline / reconstructed,
            leg_speeds: [out, back],
            apparatus_time,
            observer_time,
            proper_time: reconstructed,
        })
    }
}

/// Round-trip quotient for a clock of the given baseline oriented along x.
pub fn light_quotient_scenario(frame_boost: &BoundedVelocity, baseline: f64) -> Result<f64, Error> {
    Ok(LightClock::new(baseline, Vec3::x())?.measure(frame_boost)?.quotient)
}

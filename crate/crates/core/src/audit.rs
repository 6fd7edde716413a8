//! Numerical audits of the conservation and invariance statements.
//!
//! Every audit returns an [`AuditOutcome`] carrying its verdict, the worst
//! residual found and the tolerance it was held to. The catalog order is
//! also the order in which reports list audits.

use rand::Rng;
use serde::Serialize;

use crate::dynamics::{integrate, momentum_rate, torque, Method, Trajectory};
use crate::error::Error;
use crate::forces::{check_property_additivity, ForceLaw};
use crate::frames::{random_vec, FrameTransform};
use crate::nonlinear::{check_invariance_theorem, BoundedVelocity, GFunction, LightClock};
use crate::types::{pair_state, Body, Vec3, MASS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "ERROR")]
    Error,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditOutcome {
    pub audit: String,
    pub lemma: String,
    pub verdict: Verdict,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl AuditOutcome {
    fn judged(id: AuditId, residual: f64, tolerance: f64, detail: String) -> Self {
        let verdict = if residual.is_finite() && residual < tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self::with_verdict(id, verdict, Some(residual), tolerance, detail)
    }

    fn with_verdict(id: AuditId, verdict: Verdict, residual: Option<f64>, tolerance: f64, detail: String) -> Self {
        let spec = id.spec();
        AuditOutcome {
            audit: spec.name.to_string(),
            lemma: spec.lemma.to_string(),
            verdict,
            residual: residual.map(|r| if r.is_finite() { r } else { f64::MAX }),
            tolerance,
            detail,
        }
    }

    pub fn error(id: AuditId, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self::with_verdict(id, Verdict::Error, None, tolerance, err.to_string())
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuditId {
    FrameGroup,
    ObjectivitySweep,
    TimeOrder,
    Inertia,
    Momentum,
    MomentumRate,
    AngularMomentum,
    Torque,
    Energy,
    BoostCovariance,
    PropertyAdditivity,
    OplusGroup,
    InvarianceTheorem,
    LightQuotient,
}

pub struct AuditSpec {
    pub id: AuditId,
    pub name: &'static str,
    pub lemma: &'static str,
    pub description: &'static str,
    pub default_tolerance: f64,
}

pub const CATALOG: &[AuditSpec] = &[
    AuditSpec {
        id: AuditId::FrameGroup,
        name: "frame-group",
        lemma: "frame-group-axioms",
        description: "observer changes form a group: identity, inverse and associativity hold field by field",
        default_tolerance: 1e-12,
    },
    AuditSpec {
        id: AuditId::ObjectivitySweep,
        name: "objectivity-sweep",
        lemma: "objectivity",
        description: "relative distance, relative speed and internal energy agree in every random frame",
        default_tolerance: 1e-12,
    },
    AuditSpec {
        id: AuditId::TimeOrder,
        name: "time-order",
        lemma: "time-order",
        description: "sample times strictly increase and keep their order under monotone reparameterisation",
        default_tolerance: 0.5,
    },
    AuditSpec {
        id: AuditId::Inertia,
        name: "inertia",
        lemma: "inertia",
        description: "an isolated pair keeps a constant relative velocity",
        default_tolerance: 1e-12,
    },
    AuditSpec {
        id: AuditId::Momentum,
        name: "momentum",
        lemma: "momentum-balance",
        description: "total momentum stays at its initial value (max |P(t) - P(0)|)",
        default_tolerance: 1e-9,
    },
    AuditSpec {
        id: AuditId::MomentumRate,
        name: "dpdt-identity",
        lemma: "momentum-balance",
        description: "finite-difference dP/dt equals 2 (x_AB x v_AB) phi_perp to second order in the step",
        default_tolerance: 1e-8,
    },
    AuditSpec {
        id: AuditId::AngularMomentum,
        name: "angular-momentum",
        lemma: "internal-torque",
        description: "internal angular momentum x_AB x mu v_AB stays at its initial value",
        default_tolerance: 1e-9,
    },
    AuditSpec {
        id: AuditId::Torque,
        name: "dldt-identity",
        lemma: "internal-torque",
        description: "finite-difference dL/dt equals the internal torque formula to second order in the step",
        default_tolerance: 1e-8,
    },
    AuditSpec {
        id: AuditId::Energy,
        name: "energy",
        lemma: "internal-energy",
        description: "internal energy of a central law stays constant (max relative drift)",
        default_tolerance: 1e-8,
    },
    AuditSpec {
        id: AuditId::BoostCovariance,
        name: "boost-covariance",
        lemma: "boost-covariance",
        description: "integrate-then-boost and boost-then-integrate give the same relative states",
        default_tolerance: 1e-9,
    },
    AuditSpec {
        id: AuditId::PropertyAdditivity,
        name: "property-additivity",
        lemma: "property-additivity",
        description: "each law is additive in its declared defining property",
        default_tolerance: 1e-12,
    },
    AuditSpec {
        id: AuditId::OplusGroup,
        name: "oplus-group",
        lemma: "bounded-velocity-group",
        description: "bounded velocity addition: closure, neutral, inverse, commutativity, associativity",
        default_tolerance: 1e-10,
    },
    AuditSpec {
        id: AuditId::InvarianceTheorem,
        name: "invariance-theorem",
        lemma: "proper-time-invariance",
        description: "equal proper times give invariant distances; a perturbed proper time breaks them",
        default_tolerance: 1e-12,
    },
    AuditSpec {
        id: AuditId::LightQuotient,
        name: "light-quotient",
        lemma: "light-quotient",
        description: "round-trip distance over source proper time equals the limiting speed in every frame",
        default_tolerance: 1e-12,
    },
];

impl AuditId {
    pub fn spec(self) -> &'static AuditSpec {
        CATALOG.iter().find(|s| s.id == self).expect("every audit id is catalogued")
    }

    pub fn name(self) -> &'static str {
        self.spec().name
    }

    pub fn from_name(name: &str) -> Option<AuditId> {
        CATALOG.iter().find(|s| s.name == name).map(|s| s.id)
    }

    /// Whether the audit needs the velocity-addition block of a scenario.
    pub fn needs_velocity_group(self) -> bool {
        matches!(self, AuditId::OplusGroup | AuditId::InvarianceTheorem | AuditId::LightQuotient)
    }
}

/// Minimum residual reduction when the step is halved for a second-order
/// finite-difference identity.
pub const MIN_CONVERGENCE_RATIO: f64 = 3.5;

/// Relative energy tolerance for velocity Verlet, whose energy error
/// oscillates at second order.
pub const VERLET_ENERGY_TOLERANCE: f64 = 1e-6;

// ---------------------------------------------------------------------------
// frames

/// Worst field residual of the group laws over `samples` random triples.
pub fn frame_group_residual<R: Rng + ?Sized>(rng: &mut R, samples: usize) -> f64 {
    let id = FrameTransform::identity();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let a = FrameTransform::random(rng, 10.0, 3.0, 5.0);
        let b = FrameTransform::random(rng, 10.0, 3.0, 5.0);
        let c = FrameTransform::random(rng, 10.0, 3.0, 5.0);
        let assoc = a.compose(&b).compose(&c).max_field_difference(&a.compose(&b.compose(&c)));
        let left = id.compose(&a).max_field_difference(&a);
        let right = a.compose(&id).max_field_difference(&a);
        let inv = a.compose(&a.inverse()).max_field_difference(&id);
        let inv_left = a.inverse().compose(&a).max_field_difference(&id);
        let closure = crate::frames::orthogonality_residual(a.compose(&b).rotation());
        worst = worst.max(assoc).max(left).max(right).max(inv).max(inv_left).max(closure);
    }
    worst
}

pub fn frame_group_audit<R: Rng + ?Sized>(rng: &mut R, samples: usize, tolerance: f64) -> AuditOutcome {
    let r = frame_group_residual(rng, samples);
    AuditOutcome::judged(AuditId::FrameGroup, r, tolerance, format!("{samples} random triples"))
}

/// Relative distance, relative speed and (for central laws) internal energy
/// evaluated in every frame, compared with the untransformed values.
pub fn objectivity_sweep(a: &Body, b: &Body, t: f64, law: &ForceLaw, frames: &[FrameTransform], tolerance: f64) -> AuditOutcome {
    let reference = pair_state(a, b);
    let energy0 = match crate::dynamics::observables(a, b, law) {
        Ok(o) => o.internal_energy,
        Err(e) => return AuditOutcome::error(AuditId::ObjectivitySweep, tolerance, e),
    };
    let d0 = reference.distance();
    let s0 = reference.speed();
    let mut reps = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        reps.push((format!("frame {i}"), (f.apply(a, t), f.apply(b, t))));
    }
    let scale = |x: f64| x.abs().max(1.0);
    let dist = crate::frames::check_objectivity(|(x, y): &(Body, Body)| (pair_state(x, y).distance() - d0) / scale(d0), &reps, tolerance);
    let speed = crate::frames::check_objectivity(|(x, y): &(Body, Body)| (pair_state(x, y).speed() - s0) / scale(s0), &reps, tolerance);
    let mut worst = dist.worst_residual.max(speed.worst_residual);
    let mut detail = format!("{} frames; distance {:.3e}, speed {:.3e}", frames.len(), dist.worst_residual, speed.worst_residual);
    if let Some(e0) = energy0 {
        let energy = crate::frames::check_objectivity(
            |(x, y): &(Body, Body)| match crate::dynamics::observables(x, y, law) {
                Ok(o) => (o.internal_energy.unwrap_or(f64::NAN) - e0) / scale(e0),
                Err(_) => f64::NAN,
            },
            &reps,
            tolerance,
        );
        worst = worst.max(energy.worst_residual);
        detail.push_str(&format!(", energy {:.3e}", energy.worst_residual));
    }
    AuditOutcome::judged(AuditId::ObjectivitySweep, worst, tolerance, detail)
}

/// Times strictly increasing, and order preserved under a strictly
/// increasing reparameterisation. The residual counts violations.
pub fn time_order_audit(traj: &Trajectory, tolerance: f64) -> AuditOutcome {
    let mut violations = 0usize;
    if traj.times.len() != traj.states.len() {
        violations += 1;
    }
    violations += traj.times.windows(2).filter(|w| !(w[0] < w[1])).count();
    let reparam = |t: f64| t + t.powi(3) / 3.0 + (0.5 * t).tanh();
    let mapped: Vec<f64> = traj.times.iter().map(|&t| reparam(t)).collect();
    violations += mapped.windows(2).filter(|w| !(w[0] < w[1])).count();
    AuditOutcome::judged(
        AuditId::TimeOrder,
        violations as f64,
        tolerance,
        format!("{} samples, {violations} order violations", traj.len()),
    )
}

// ---------------------------------------------------------------------------
// dynamics

/// Worst deviation of an isolated pair from its straight line, relative to
/// the size of the relative displacement.
pub fn inertia_residual(a: &Body, b: &Body, t_end: f64, step: f64, method: Method) -> Result<f64, Error> {
    let traj = integrate(a, b, &ForceLaw::none(), t_end, step, method)?;
    let p0 = pair_state(a, b);
    let scale = p0.x_ab.norm().max(p0.v_ab.norm() * t_end).max(f64::MIN_POSITIVE);
    Ok(traj
        .times
        .iter()
        .zip(traj.pair_states())
        .map(|(t, p)| (p.x_ab - (p0.x_ab + p0.v_ab * *t)).norm() / scale)
        .fold(0.0, f64::max))
}

pub fn inertia_audit(a: &Body, b: &Body, t_end: f64, step: f64, method: Method, tolerance: f64) -> AuditOutcome {
    match inertia_residual(a, b, t_end, step, method) {
        Ok(r) => AuditOutcome::judged(
            AuditId::Inertia,
            r,
            tolerance,
            format!("{} steps without interaction", (t_end / step).ceil()),
        ),
        Err(e) => AuditOutcome::error(AuditId::Inertia, tolerance, e),
    }
}

pub fn max_deviation(samples: &[Vec3]) -> f64 {
    let Some(first) = samples.first() else { return 0.0 };
    samples.iter().map(|s| (s - first).norm()).fold(0.0, f64::max)
}

pub fn momentum_audit(traj: &Trajectory, tolerance: f64) -> AuditOutcome {
    let p = traj.momenta();
    let r = max_deviation(&p);
    let end = p.last().copied().unwrap_or_default() - p.first().copied().unwrap_or_default();
    AuditOutcome::judged(
        AuditId::Momentum,
        r,
        tolerance,
        format!("P(t_end) - P(0) = [{:.6e}, {:.6e}, {:.6e}]", end.x, end.y, end.z),
    )
}

pub fn angular_momentum_audit(traj: &Trajectory, tolerance: f64) -> AuditOutcome {
    let r = max_deviation(&traj.angular_momenta());
    AuditOutcome::judged(AuditId::AngularMomentum, r, tolerance, format!("{} samples", traj.len()))
}

/// Worst mismatch between a finite-difference rate and its predicted value
/// over the interior samples.
pub fn rate_residual<F>(traj: &Trajectory, fd: &[Vec3], predicted: F) -> Result<f64, Error>
where
    F: Fn(&ForceLaw, &Body, &Body) -> Result<Vec3, Error>,
{
    let mut worst = 0.0_f64;
    for i in traj.interior() {
        let (a, b) = &traj.states[i];
        worst = worst.max((fd[i] - predicted(&traj.law, a, b)?).norm());
    }
    Ok(worst)
}

/// Residuals of a rate identity at `step` and `step / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub coarse: f64,
    pub fine: f64,
}

impl Convergence {
    pub fn ratio(&self) -> f64 {
        self.coarse / self.fine
    }

    /// Either the identity already holds at the rounding floor, or the
    /// residual falls at least `min_ratio` times when the step halves.
    pub fn holds(&self, floor: f64, min_ratio: f64) -> bool {
        self.coarse < floor || (self.ratio() >= min_ratio && self.fine.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateIdentity {
    /// dP/dt = 2 (x × v) φ_⊥
    Momentum,
    /// dL/dt = torque formula
    AngularMomentum,
}

pub fn rate_convergence(
    identity: RateIdentity,
    a: &Body,
    b: &Body,
    law: &ForceLaw,
    t_end: f64,
    step: f64,
    method: Method,
) -> Result<Convergence, Error> {
    let residual = |h: f64| -> Result<f64, Error> {
        let traj = integrate(a, b, law, t_end, h, method)?;
        match identity {
            RateIdentity::Momentum => rate_residual(&traj, &traj.momentum_derivative(), momentum_rate),
            RateIdentity::AngularMomentum => rate_residual(&traj, &traj.angular_momentum_derivative(), torque),
        }
    };
    Ok(Convergence {
        coarse: residual(step)?,
        fine: residual(0.5 * step)?,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn rate_audit(
    identity: RateIdentity,
    a: &Body,
    b: &Body,
    law: &ForceLaw,
    t_end: f64,
    step: f64,
    method: Method,
    floor: f64,
) -> AuditOutcome {
    let id = match identity {
        RateIdentity::Momentum => AuditId::MomentumRate,
        RateIdentity::AngularMomentum => AuditId::Torque,
    };
    match rate_convergence(identity, a, b, law, t_end, step, method) {
        Ok(c) => {
            let verdict = if c.holds(floor, MIN_CONVERGENCE_RATIO) { Verdict::Pass } else { Verdict::Fail };
            AuditOutcome::with_verdict(
                id,
                verdict,
                Some(c.coarse),
                floor,
                if c.coarse < floor {
                    format!("residual {:.3e} at step {step}, below the floor {floor:e}", c.coarse)
                } else {
                    format!(
                        "residual {:.3e} at step {step}, {:.3e} at step {}; ratio {:.3} (need >= {MIN_CONVERGENCE_RATIO})",
                        c.coarse,
                        c.fine,
                        0.5 * step,
                        c.ratio()
                    )
                },
            )
        }
        Err(e) => AuditOutcome::error(id, floor, e),
    }
}

/// Energy drift statistics along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDrift {
    pub initial: f64,
    /// max |E(t) − E(0)| / |E(0)|
    pub max_relative: f64,
    /// |mean over the last tenth − mean over the first tenth| / |E(0)|
    pub secular: f64,
}

pub fn energy_drift(traj: &Trajectory) -> Result<Option<EnergyDrift>, Error> {
    let Some(e) = traj.energies()? else { return Ok(None) };
    let e0 = e[0];
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let max_relative = e.iter().map(|x| (x - e0).abs() / scale).fold(0.0, f64::max);
    let tenth = (e.len() / 10).max(1);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let secular = (mean(&e[e.len() - tenth..]) - mean(&e[..tenth])).abs() / scale;
    Ok(Some(EnergyDrift {
        initial: e0,
        max_relative,
        secular,
    }))
}

pub fn energy_audit(traj: &Trajectory, tolerance: f64) -> AuditOutcome {
    match energy_drift(traj) {
        Ok(Some(d)) => AuditOutcome::judged(
            AuditId::Energy,
            d.max_relative,
            tolerance,
            format!("E(0) = {:.12e}, secular drift {:.3e}, method {}", d.initial, d.secular, traj.method),
        ),
        Ok(None) => AuditOutcome::error(
            AuditId::Energy,
            tolerance,
            format!("law `{}` is not central; internal energy is undefined", traj.law.name()),
        ),
        Err(e) => AuditOutcome::error(AuditId::Energy, tolerance, e),
    }
}

/// Worst relative-state mismatch between integrate-then-boost and
/// boost-then-integrate, relative to the state scale.
pub fn boost_covariance_residual(traj: &Trajectory, boosts: &[Vec3]) -> Result<f64, Error> {
    let (a0, b0) = &traj.states[0];
    let t_end = *traj.times.last().unwrap_or(&0.0);
    let base = traj.pair_states();
    let scale = base
        .iter()
        .map(|p| p.x_ab.norm().max(p.v_ab.norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for w in boosts {
        let frame = FrameTransform::pure_boost(*w);
        let after = traj.transformed(&frame).pair_states();
        let boosted = integrate(&frame.apply(a0, 0.0), &frame.apply(b0, 0.0), &traj.law, t_end, traj.step, traj.method)?;
        for (p, q) in after.iter().zip(boosted.pair_states()) {
            let d = (p.x_ab - q.x_ab).norm().max((p.v_ab - q.v_ab).norm());
            worst = worst.max(d / scale);
        }
    }
    Ok(worst)
}

pub fn boost_covariance_audit(traj: &Trajectory, boosts: &[Vec3], tolerance: f64) -> AuditOutcome {
    match boost_covariance_residual(traj, boosts) {
        Ok(r) => AuditOutcome::judged(AuditId::BoostCovariance, r, tolerance, format!("{} random boosts", boosts.len())),
        Err(e) => AuditOutcome::error(AuditId::BoostCovariance, tolerance, e),
    }
}

/// Splits A's declared property of every law into two parts and checks that
/// the forces add up.
pub fn property_additivity_audit(laws: &[ForceLaw], a: &Body, b: &Body, tolerance: f64) -> AuditOutcome {
    let mut worst = 0.0_f64;
    let mut checked = Vec::new();
    let mut failed = Vec::new();
    for law in laws {
        let Some(prop) = law.additive_property() else { continue };
        let q = a.property(prop);
        let (q1, q2) = if prop == MASS { (0.3 * q, 0.7 * q) } else { (0.3 * q + 0.5, 0.7 * q - 0.5) };
        let parts = a.clone().with_property(prop, q1).and_then(|a1| Ok((a1, a.clone().with_property(prop, q2)?)));
        let result = parts.and_then(|(a1, a2)| check_property_additivity(law, prop, &a1, &a2, b, tolerance));
        match result {
            Ok(c) => {
                worst = worst.max(c.residual / c.tolerance * tolerance);
                if !c.passed {
                    failed.push(law.name().to_string());
                }
                checked.push(format!("{}:{prop}", law.name()));
            }
            Err(e) => return AuditOutcome::error(AuditId::PropertyAdditivity, tolerance, e),
        }
    }
    if checked.is_empty() {
        return AuditOutcome::judged(
            AuditId::PropertyAdditivity,
            0.0,
            tolerance,
            "no law declares an additive property".into(),
        );
    }
    let detail = if failed.is_empty() {
        format!("checked {}", checked.join(", "))
    } else {
        format!("checked {}; not additive: {}", checked.join(", "), failed.join(", "))
    };
    AuditOutcome::judged(AuditId::PropertyAdditivity, worst, tolerance, detail)
}

// ---------------------------------------------------------------------------
// velocity addition

/// Uniformly random direction, speed uniform in `[0, max_fraction·C)`.
pub fn random_velocity<R: Rng + ?Sized>(rng: &mut R, group: GFunction, max_fraction: f64) -> BoundedVelocity {
    let c = group.signal_speed();
    loop {
        let d = random_vec(rng, 1.0);
        let n = d.norm();
        if n > 1e-3 && n <= 1.0 {
            let speed = rng.gen_range(0.0..max_fraction) * c;
            if let Ok(v) = BoundedVelocity::new(d * (speed / n), group) {
                return v;
            }
        }
    }
}

/// Group-law residuals of ⊕ over random triples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OplusResiduals {
    pub closure_violations: usize,
    pub neutral: f64,
    pub inverse: f64,
    pub commutativity: f64,
    pub associativity: f64,
    /// ‖g(W)W − g(U)U − g(V)V‖ / (1 + ‖g(U)U + g(V)V‖)
    pub reconstruction: f64,
}

impl OplusResiduals {
    pub fn worst(&self) -> f64 {
        self.neutral
            .max(self.inverse)
            .max(self.commutativity)
            .max(self.associativity)
            .max(self.reconstruction)
    }
}

pub fn oplus_residuals<R: Rng + ?Sized>(rng: &mut R, group: GFunction, samples: usize) -> Result<OplusResiduals, Error> {
    let mut out = OplusResiduals::default();
    let zero = BoundedVelocity::zero(group);
    for _ in 0..samples {
        let u = random_velocity(rng, group, 0.99);
        let v = random_velocity(rng, group, 0.99);
        let w = random_velocity(rng, group, 0.99);
        let uv = u.oplus(&v)?;
        let vu = v.oplus(&u)?;
        if let Some(c) = group.limit() {
            if !(uv.speed() < c) {
                out.closure_violations += 1;
            }
        }
        out.commutativity = out.commutativity.max((uv.vector() - vu.vector()).norm());
        let left = w.oplus(&v)?.oplus(&u)?;
        let right = w.oplus(&v.oplus(&u)?)?;
        if let Some(c) = group.limit() {
            if !(left.speed() < c && right.speed() < c) {
                out.closure_violations += 1;
            }
        }
        out.associativity = out.associativity.max((left.vector() - right.vector()).norm());
        out.neutral = out.neutral.max((u.oplus(&zero)?.vector() - u.vector()).norm());
        out.inverse = out.inverse.max(u.oplus(&u.neg())?.vector().norm());
        let rhs = u.scaled() + v.scaled();
        out.reconstruction = out.reconstruction.max((uv.scaled() - rhs).norm() / (1.0 + rhs.norm()));
    }
    Ok(out)
}

pub fn oplus_group_audit<R: Rng + ?Sized>(rng: &mut R, group: GFunction, samples: usize, tolerance: f64) -> AuditOutcome {
    match oplus_residuals(rng, group, samples) {
        Ok(r) => {
            let residual = if r.closure_violations > 0 { f64::INFINITY } else { r.worst() };
            AuditOutcome::judged(
                AuditId::OplusGroup,
                residual,
                tolerance,
                format!(
                    "{group}, {samples} triples: closure violations {}, commutativity {:.3e}, associativity {:.3e}, inverse {:.3e}",
                    r.closure_violations, r.commutativity, r.associativity, r.inverse
                ),
            )
        }
        Err(e) => AuditOutcome::error(AuditId::OplusGroup, tolerance, e),
    }
}

/// Worst relative distance residual and worst perturbation mismatch over
/// random `(V2, V3, ΔT)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InvarianceResiduals {
    pub distance: f64,
    pub perturbation_mismatch: f64,
    pub min_perturbed: f64,
}

pub fn invariance_residuals<R: Rng + ?Sized>(rng: &mut R, group: GFunction, samples: usize) -> Result<InvarianceResiduals, Error> {
    let mut out = InvarianceResiduals {
        min_perturbed: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..samples {
        let v2 = loop {
            let v = random_velocity(rng, group, 0.99);
            if v.speed() > 0.01 * group.signal_speed() {
                break v;
            }
        };
        let v3 = random_velocity(rng, group, 0.99);
        let dt: f64 = rng.gen_range(0.01..1.0);
        let check = check_invariance_theorem(&v2, &v3, dt)?;
        out.distance = out.distance.max(check.relative_residual());
        out.perturbation_mismatch = out.perturbation_mismatch.max(check.perturbation_mismatch());
        out.min_perturbed = out.min_perturbed.min(check.perturbed_residual);
    }
    Ok(out)
}

/// Relative tolerance on the perturbed residual against its first-order
/// prediction.
pub const PERTURBATION_MATCH: f64 = 0.1;

pub fn invariance_theorem_audit<R: Rng + ?Sized>(rng: &mut R, group: GFunction, samples: usize, tolerance: f64) -> AuditOutcome {
    match invariance_residuals(rng, group, samples) {
        Ok(r) => {
            let converse = r.perturbation_mismatch < PERTURBATION_MATCH && r.min_perturbed > tolerance;
            let residual = if converse { r.distance } else { f64::INFINITY };
            AuditOutcome::judged(
                AuditId::InvarianceTheorem,
                residual,
                tolerance,
                format!(
                    "{group}, {samples} samples: distance residual {:.3e}, perturbation mismatch {:.3e}",
                    r.distance, r.perturbation_mismatch
                ),
            )
        }
        Err(e) => AuditOutcome::error(AuditId::InvarianceTheorem, tolerance, e),
    }
}

/// Worst `|quotient − C| / C` over the given frame boosts.
pub fn light_quotient_residual(group: GFunction, baseline: f64, boosts: &[BoundedVelocity]) -> Result<f64, Error> {
    let clock = LightClock::new(baseline, Vec3::x())?;
    let c = group.signal_speed();
    let mut worst = 0.0_f64;
    for b in boosts {
        let q = clock.measure(b)?.quotient;
        worst = worst.max((q - c).abs() / c);
    }
    Ok(worst)
}

pub fn light_quotient_audit(group: GFunction, baseline: f64, boosts: &[BoundedVelocity], tolerance: f64) -> AuditOutcome {
    match light_quotient_residual(group, baseline, boosts) {
        Ok(r) => AuditOutcome::judged(
            AuditId::LightQuotient,
            r,
            tolerance,
            format!("{group}, baseline {baseline}, {} frame boosts", boosts.len()),
        ),
        Err(e) => AuditOutcome::error(AuditId::LightQuotient, tolerance, e),
    }
}

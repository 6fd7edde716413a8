//! Pairwise force laws in the canonical three-channel decomposition
//!
//! ```text
//! f = x_AB φ_e + v_AB φ_s + (x_AB × v_AB) φ_⊥        (force on A)
//! k = −x_AB φ_e − v_AB φ_s + (x_AB × v_AB) φ_⊥       (force on B)
//! ```
//!
//! The coefficients only ever see the two bodies' scalar properties and the
//! rotation invariants of the relative state, so every law built here is
//! rotation covariant by construction.

use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::types::{cross, pair_state, Body, PairState, Properties, Vec3, MASS};

/// Read-only view of the intrinsic (non-geometric) data of a body.
#[derive(Debug, Clone, Copy)]
pub struct Charges<'a> {
    mass: f64,
    properties: &'a Properties,
}

impl<'a> Charges<'a> {
    pub fn of(body: &'a Body) -> Self {
        Charges {
            mass: body.mass(),
            properties: body.properties(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn get(&self, name: &str) -> f64 {
        if name == MASS {
            return self.mass;
        }
        self.properties.get(name).copied().unwrap_or(0.0)
    }
}

/// Rotation invariants of a relative state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    /// ‖x_AB‖, possibly softened.
    pub distance: f64,
    /// ‖v_AB‖
    pub speed: f64,
    /// x_AB · v_AB
    pub radial: f64,
}

pub type Coefficient = Arc<dyn Fn(&Charges, &Charges, &Invariants) -> f64 + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(&Charges, &Charges, f64) -> f64 + Send + Sync>;

/// What to do when the separation drops below `epsilon` for a law that is
/// singular at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    Error { epsilon: f64 },
    /// ‖x‖ → sqrt(‖x‖² + ε²)
    Soften { epsilon: f64 },
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Error { epsilon: 1e-9 }
    }
}

#[derive(Clone)]
struct Central {
    h: RadialFn,
    potential: Option<RadialFn>,
}

/// A pairwise law given by its three scalar coefficients. A missing
/// coefficient is identically zero.
#[derive(Clone)]
pub struct ForceLaw {
    name: String,
    phi_e: Option<Coefficient>,
    phi_s: Option<Coefficient>,
    phi_perp: Option<Coefficient>,
    central: Option<Central>,
    singular: bool,
    regularization: Regularization,
    additive_property: Option<String>,
    reference_radius: f64,
}

impl fmt::Debug for ForceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForceLaw")
            .field("name", &self.name)
            .field("phi_e", &self.phi_e.is_some())
            .field("phi_s", &self.phi_s.is_some())
            .field("phi_perp", &self.phi_perp.is_some())
            .field("central", &self.central.is_some())
            .field("singular", &self.singular)
            .field("regularization", &self.regularization)
            .finish()
    }
}

impl ForceLaw {
    /// The law of an isolated pair: no force at all.
    pub fn none() -> Self {
        ForceLaw {
            name: "none".into(),
            phi_e: None,
            phi_s: None,
            phi_perp: None,
            central: None,
            singular: false,
            regularization: Regularization::default(),
            additive_property: None,
            reference_radius: 1.0,
        }
    }

    pub fn named(name: impl Into<String>) -> Self {
        ForceLaw {
            name: name.into(),
            ..Self::none()
        }
    }

    /// A central law `φ_e = h(‖x_AB‖)` with `φ_s = φ_⊥ = 0`. `potential`, when
    /// given, must satisfy `−∇V = h(r)·x`; otherwise V is obtained by
    /// quadrature when needed.
    pub fn central<H>(name: impl Into<String>, h: H, potential: Option<RadialFn>) -> Self
    where
        H: Fn(&Charges, &Charges, f64) -> f64 + Send + Sync + 'static,
    {
        let h: RadialFn = Arc::new(h);
        let h2 = h.clone();
        ForceLaw {
            phi_e: Some(Arc::new(move |a: &Charges, b: &Charges, inv: &Invariants| h2(a, b, inv.distance))),
            central: Some(Central { h, potential }),
            ..Self::named(name)
        }
    }

    pub fn with_phi_e<F>(mut self, f: F) -> Self
    where
        F: Fn(&Charges, &Charges, &Invariants) -> f64 + Send + Sync + 'static,
    {
        self.phi_e = Some(Arc::new(f));
        self.central = None;
        self
    }

    pub fn with_phi_s<F>(mut self, f: F) -> Self
    where
        F: Fn(&Charges, &Charges, &Invariants) -> f64 + Send + Sync + 'static,
    {
        self.phi_s = Some(Arc::new(f));
        self.central = None;
        self
    }

    pub fn with_phi_perp<F>(mut self, f: F) -> Self
    where
        F: Fn(&Charges, &Charges, &Invariants) -> f64 + Send + Sync + 'static,
    {
        self.phi_perp = Some(Arc::new(f));
        self.central = None;
        self
    }

    /// Marks the law as singular at zero separation.
    pub fn singular(mut self) -> Self {
        self.singular = true;
        self
    }

    pub fn with_regularization(mut self, r: Regularization) -> Self {
        self.regularization = r;
        self
    }

    /// Declares the property in which the law is additive.
    pub fn with_additive_property(mut self, name: impl Into<String>) -> Self {
        self.additive_property = Some(name.into());
        self
    }

    /// Radius where the quadrature potential is pinned to zero.
    pub fn with_reference_radius(mut self, r0: f64) -> Self {
        self.reference_radius = r0;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn additive_property(&self) -> Option<&str> {
        self.additive_property.as_deref()
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn reference_radius(&self) -> f64 {
        self.reference_radius
    }

    pub fn has_phi_s(&self) -> bool {
        self.phi_s.is_some()
    }

    pub fn has_phi_perp(&self) -> bool {
        self.phi_perp.is_some()
    }

    /// True when the force does not depend on the relative velocity.
    pub fn is_velocity_independent(&self) -> bool {
        self.central.is_some() || (self.phi_s.is_none() && self.phi_perp.is_none() && self.phi_e.is_none())
    }

    /// `φ_s = φ_⊥ = 0` and `φ_e` depends on the distance only.
    pub fn is_central(&self) -> bool {
        self.central.is_some() || (self.phi_e.is_none() && self.phi_s.is_none() && self.phi_perp.is_none())
    }

    /// Distance that enters the coefficients, after the singularity policy.
    fn effective_distance(&self, r: f64) -> Result<f64, Error> {
        if !self.singular {
            return Ok(r);
        }
        match self.regularization {
            Regularization::Error { epsilon } => {
                if r < epsilon {
                    Err(Error::Singularity {
                        law: self.name.clone(),
                        distance: r,
                        epsilon,
                    })
                } else {
                    Ok(r)
                }
            }
            Regularization::Soften { epsilon } => Ok(r.hypot(epsilon)),
        }
    }

    pub fn invariants(&self, pair: &PairState) -> Result<Invariants, Error> {
        Ok(Invariants {
            distance: self.effective_distance(pair.distance())?,
            speed: pair.speed(),
            radial: pair.radial(),
        })
    }

    /// `(φ_e, φ_s, φ_⊥)` for A acted on by B.
    pub fn coefficients(&self, a: &Body, b: &Body) -> Result<[f64; 3], Error> {
        self.coefficients_at(&Charges::of(a), &Charges::of(b), &pair_state(a, b))
    }

    pub fn coefficients_at(&self, a: &Charges, b: &Charges, pair: &PairState) -> Result<[f64; 3], Error> {
        let inv = self.invariants(pair)?;
        let eval = |c: &Option<Coefficient>| c.as_ref().map_or(0.0, |f| f(a, b, &inv));
        Ok([eval(&self.phi_e), eval(&self.phi_s), eval(&self.phi_perp)])
    }

    /// Force on A caused by B.
    pub fn force_on_a(&self, a: &Body, b: &Body) -> Result<Vec3, Error> {
        let pair = pair_state(a, b);
        let [pe, ps, pp] = self.coefficients(a, b)?;
        Ok(compose_force(&pair, pe, ps, pp))
    }

    /// Force on B caused by A.
    pub fn force_on_b(&self, a: &Body, b: &Body) -> Result<Vec3, Error> {
        let pair = pair_state(a, b);
        let [pe, ps, pp] = self.coefficients(a, b)?;
        Ok(compose_force(&pair, -pe, -ps, pp))
    }

    /// Both forces from a single coefficient evaluation.
    pub fn force_pair(&self, a: &Body, b: &Body) -> Result<(Vec3, Vec3), Error> {
        let pair = pair_state(a, b);
        let [pe, ps, pp] = self.coefficients(a, b)?;
        let along = pair.x_ab * pe + pair.v_ab * ps;
        let perp = cross(&pair.x_ab, &pair.v_ab) * pp;
        Ok((along + perp, perp - along))
    }

    /// `h(r)` of a central law.
    pub fn radial_profile(&self, a: &Charges, b: &Charges, r: f64) -> Option<f64> {
        self.central.as_ref().map(|c| c.h(a, b, r))
    }

    /// Registered closed-form potential, if any.
    pub fn closed_form_potential(&self, a: &Charges, b: &Charges, r: f64) -> Option<f64> {
        self.central.as_ref()?.potential.as_ref().map(|v| v(a, b, r))
    }

    pub fn has_closed_form_potential(&self) -> bool {
        self.central.as_ref().is_some_and(|c| c.potential.is_some())
    }

    /// Merged law whose coefficients are the sums of the parts.
    pub fn sum(laws: &[ForceLaw]) -> ForceLaw {
        if laws.len() == 1 {
            return laws[0].clone();
        }
        let name = if laws.is_empty() {
            "none".to_string()
        } else {
            laws.iter().map(|l| l.name.as_str()).collect::<Vec<_>>().join("+")
        };
        let mut merged = ForceLaw::named(name);
        merged.singular = laws.iter().any(|l| l.singular);
        if let Some(l) = laws.iter().find(|l| l.singular) {
            merged.regularization = l.regularization;
        }
        let all_central = laws.iter().all(|l| l.is_central());
        if all_central && !laws.is_empty() {
            let parts: Vec<ForceLaw> = laws.to_vec();
            let parts_h = parts.clone();
            let h: RadialFn = Arc::new(move |a, b, r| {
                parts_h.iter().map(|l| l.radial_profile(a, b, r).unwrap_or(0.0)).sum()
            });
            let potential: Option<RadialFn> = if parts.iter().all(|l| l.has_closed_form_potential() || l.central.is_none()) {
                let parts_v = parts.clone();
                Some(Arc::new(move |a, b, r| {
                    parts_v.iter().map(|l| l.closed_form_potential(a, b, r).unwrap_or(0.0)).sum()
                }))
            } else {
                None
            };
            let h2 = h.clone();
            merged.phi_e = Some(Arc::new(move |a: &Charges, b: &Charges, inv: &Invariants| h2(a, b, inv.distance)));
            merged.central = Some(Central { h, potential });
            return merged;
        }
        let sum_of = |parts: Vec<Coefficient>| -> Option<Coefficient> {
            if parts.is_empty() {
                return None;
            }
            Some(Arc::new(move |a: &Charges, b: &Charges, inv: &Invariants| {
                parts.iter().map(|f| f(a, b, inv)).sum()
            }))
        };
        merged.phi_e = sum_of(laws.iter().filter_map(|l| l.phi_e.clone()).collect());
        merged.phi_s = sum_of(laws.iter().filter_map(|l| l.phi_s.clone()).collect());
        merged.phi_perp = sum_of(laws.iter().filter_map(|l| l.phi_perp.clone()).collect());
        merged
    }
}

impl Central {
    fn h(&self, a: &Charges, b: &Charges, r: f64) -> f64 {
        (self.h)(a, b, r)
    }
}

fn compose_force(pair: &PairState, pe: f64, ps: f64, pp: f64) -> Vec3 {
    pair.x_ab * pe + pair.v_ab * ps + cross(&pair.x_ab, &pair.v_ab) * pp
}

/// Sum of the forces on A over several laws.
pub fn superpose(laws: &[ForceLaw], a: &Body, b: &Body) -> Result<Vec3, Error> {
    laws.iter().try_fold(Vec3::zeros(), |acc, law| Ok(acc + law.force_on_a(a, b)?))
}

/// Result of an additivity check on one property.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityCheck {
    pub passed: bool,
    /// ‖f(Q1+Q2) − f(Q1) − f(Q2)‖
    pub residual: f64,
    pub tolerance: f64,
    pub merged_force: Vec3,
    pub summed_force: Vec3,
}

/// Checks `f(Q1 + Q2, …) = f(Q1, …) + f(Q2, …)` for the named property of A.
///
/// `a1` and `a2` must share position and velocity; the merged body carries
/// the summed property. The tolerance is relative to the larger of the two
/// sides, with an absolute floor of `rel_tol`.
pub fn check_property_additivity(
    law: &ForceLaw,
    property: &str,
    a1: &Body,
    a2: &Body,
    b: &Body,
    rel_tol: f64,
) -> Result<AdditivityCheck, Error> {
    if a1.position != a2.position || a1.velocity != a2.velocity {
        return Err(Error::InvalidArgument("additivity parts must share their kinematic state".into()));
    }
    let merged = a1.clone().with_property(property, a1.property(property) + a2.property(property))?;
    let merged_force = law.force_on_a(&merged, b)?;
    let summed_force = law.force_on_a(a1, b)? + law.force_on_a(a2, b)?;
    let residual = (merged_force - summed_force).norm();
    let scale = merged_force.norm().max(summed_force.norm()).max(1.0);
    let tolerance = rel_tol * scale;
    Ok(AdditivityCheck {
        passed: residual <= tolerance,
        residual,
        tolerance,
        merged_force,
        summed_force,
    })
}

/// Built-in law library.
pub mod presets {
    use super::*;

    /// `φ_e = −G m_A m_B / r³`, additive in mass.
    pub fn gravity(g: f64) -> ForceLaw {
        ForceLaw::central(
            "gravity",
            move |a, b, r| -g * a.mass() * b.mass() / (r * r * r),
            Some(Arc::new(move |a: &Charges, b: &Charges, r: f64| -g * a.mass() * b.mass() / r)),
        )
        .singular()
        .with_additive_property(MASS)
    }

    /// `φ_e = k q_A q_B / r³`, additive in `property`.
    pub fn coulomb(k: f64, property: &str) -> ForceLaw {
        let p1 = property.to_string();
        let p2 = property.to_string();
        ForceLaw::central(
            "coulomb",
            move |a, b, r| k * a.get(&p1) * b.get(&p1) / (r * r * r),
            Some(Arc::new(move |a: &Charges, b: &Charges, r: f64| k * a.get(&p2) * b.get(&p2) / r)),
        )
        .singular()
        .with_additive_property(property)
    }

    /// `φ_e = −κ`
    pub fn spring(kappa: f64) -> ForceLaw {
        ForceLaw::central(
            "spring",
            move |_, _, _| -kappa,
            Some(Arc::new(move |_: &Charges, _: &Charges, r: f64| 0.5 * kappa * r * r)),
        )
    }

    /// `φ_s = −γ`
    pub fn drag(gamma: f64) -> ForceLaw {
        ForceLaw::named("drag").with_phi_s(move |_, _, _| -gamma)
    }

    /// `φ_⊥ = c`
    pub fn perpendicular(c: f64) -> ForceLaw {
        ForceLaw::named("perp").with_phi_perp(move |_, _, _| c)
    }

    /// `φ_e = k q_A² q_B² / r³`: symmetric under exchange but quadratic in
    /// each charge, so it is not additive.
    pub fn quadratic_charge(k: f64, property: &str) -> ForceLaw {
        let p = property.to_string();
        ForceLaw::central(
            "quadratic-charge",
            move |a, b, r| {
                let qa = a.get(&p);
                let qb = b.get(&p);
                k * qa * qa * qb * qb / (r * r * r)
            },
            None,
        )
        .singular()
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    fn body(id: &str, m: f64, x: [f64; 3], v: [f64; 3]) -> Body {
        Body::new(id, m, Vec3::from(x), Vec3::from(v)).unwrap()
    }

    #[test]
    fn gravity_at_unit_distance() {
        let a = body("a", 1.0, [1.0, 0.0, 0.0], [0.0; 3]);
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]);
        let law = gravity(1.0);
        assert_eq!(law.force_on_a(&a, &b).unwrap(), Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(law.force_on_b(&a, &b).unwrap(), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn perpendicular_channel_vanishes_for_parallel_motion() {
        let a = body("a", 1.0, [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]);
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]);
        assert_eq!(perpendicular(17.0).force_on_a(&a, &b).unwrap(), Vec3::zeros());
    }

    #[test]
    fn drag_term() {
        let a = body("a", 1.0, [0.0; 3], [0.0, 2.0, 0.0]);
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]);
        let law = ForceLaw::named("unit-s").with_phi_s(|_, _, _| 1.0);
        assert_eq!(law.force_on_a(&a, &b).unwrap(), Vec3::new(0.0, 2.0, 0.0));
    }

    #[test]
    fn perpendicular_force_is_shared() {
        let a = body("a", 1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]);
        let law = perpendicular(1.0);
        let f = law.force_on_a(&a, &b).unwrap();
        let k = law.force_on_b(&a, &b).unwrap();
        assert_eq!(k, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(f, k);
    }

    #[test]
    fn superpose_cases() {
        let a = body("a", 2.0, [1.0, 1.0, 0.0], [0.0, 1.0, 0.5]).with_property("q", 1.5).unwrap();
        let b = body("b", 3.0, [0.0; 3], [0.0; 3]).with_property("q", -0.5).unwrap();
        assert_eq!(superpose(&[], &a, &b).unwrap(), Vec3::zeros());
        let g = gravity(1.0);
        assert_eq!(superpose(std::slice::from_ref(&g), &a, &b).unwrap(), g.force_on_a(&a, &b).unwrap());
        let c = coulomb(2.0, "q");
        let sum = superpose(&[g.clone(), c.clone()], &a, &b).unwrap();
        let expect = g.force_on_a(&a, &b).unwrap() + c.force_on_a(&a, &b).unwrap();
        assert!((sum - expect).amax() < 1e-15);
    }

    #[test]
    fn singular_law_errors_at_contact() {
        let a = body("a", 1.0, [0.0; 3], [0.0; 3]);
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]);
        assert!(matches!(gravity(1.0).force_on_a(&a, &b), Err(Error::Singularity { .. })));
        let soft = gravity(1.0).with_regularization(Regularization::Soften { epsilon: 0.1 });
        assert_eq!(soft.force_on_a(&a, &b).unwrap(), Vec3::zeros());
    }

    #[test]
    fn additivity_gravity_mass() {
        let b = body("b", 5.0, [0.0; 3], [0.0; 3]);
        let a1 = body("a", 1.0, [1.0, 2.0, 0.0], [0.0; 3]);
        let a2 = body("a", 2.0, [1.0, 2.0, 0.0], [0.0; 3]);
        let check = check_property_additivity(&gravity(1.0), MASS, &a1, &a2, &b, 1e-12).unwrap();
        assert!(check.passed, "{check:?}");
    }

    #[test]
    fn additivity_charge_cancellation() {
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]).with_property("charge", 1.0).unwrap();
        let a1 = body("a", 1.0, [0.0, 0.0, 2.0], [0.0; 3]).with_property("charge", 1.0).unwrap();
        let a2 = a1.clone().with_property("charge", -1.0).unwrap();
        let check = check_property_additivity(&coulomb(1.0, "charge"), "charge", &a1, &a2, &b, 1e-12).unwrap();
        assert!(check.passed);
        assert_eq!(check.merged_force, Vec3::zeros());
    }

    #[test]
    fn additivity_fails_for_quadratic_law() {
        let b = body("b", 1.0, [0.0; 3], [0.0; 3]).with_property("q", 2.0).unwrap();
        let a1 = body("a", 1.0, [1.0, 0.0, 0.0], [0.0; 3]).with_property("q", 1.0).unwrap();
        let a2 = a1.clone().with_property("q", 3.0).unwrap();
        let check = check_property_additivity(&quadratic_charge(1.0, "q"), "q", &a1, &a2, &b, 1e-12).unwrap();
        assert!(!check.passed);
        // 2·Q1·Q2·k·Q_B²/r³·r = 2·1·3·4 = 24
        assert!((check.residual - 24.0).abs() < 1e-12);
    }

    #[test]
    fn sum_of_central_laws_stays_central() {
        let merged = ForceLaw::sum(&[gravity(1.0), spring(2.0)]);
        assert!(merged.is_central());
        assert!(merged.has_closed_form_potential());
        let merged = ForceLaw::sum(&[gravity(1.0), drag(2.0)]);
        assert!(!merged.is_central());
        assert!(!merged.is_velocity_independent());
    }
}

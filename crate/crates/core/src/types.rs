//! Value types shared by every module: vectors, point bodies and the
//! relative state of a pair.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::error::Error;

/// Three real components. Whether it is a length, a velocity or a force is
/// carried by context; all quantities are dimensionless internally.
pub type Vec3 = Vector3<f64>;

/// Named scalar properties of a body (charge-like quantities).
pub type Properties = BTreeMap<String, f64>;

/// Name under which the mass can be addressed as a property.
pub const MASS: &str = "mass";

/// A point body: mass, additive scalar properties and kinematic state.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub id: String,
    mass: f64,
    properties: Properties,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl Body {
    pub fn new(id: impl Into<String>, mass: f64, position: Vec3, velocity: Vec3) -> Result<Self, Error> {
        let id = id.into();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidBody(format!("body `{id}`: mass must be positive and finite, got {mass}")));
        }
        if !all_finite(&position) || !all_finite(&velocity) {
            return Err(Error::InvalidBody(format!("body `{id}`: non-finite position or velocity")));
        }
        Ok(Body {
            id,
            mass,
            properties: Properties::new(),
            position,
            velocity,
        })
    }

    /// Builder-style property setter. Setting `"mass"` sets the mass.
    pub fn with_property(mut self, name: &str, value: f64) -> Result<Self, Error> {
        self.set_property(name, value)?;
        Ok(self)
    }

    pub fn set_property(&mut self, name: &str, value: f64) -> Result<(), Error> {
        if !value.is_finite() {
            return Err(Error::InvalidBody(format!("body `{}`: property `{name}` is not finite", self.id)));
        }
        if name == MASS {
            if value <= 0.0 {
                return Err(Error::InvalidBody(format!("body `{}`: mass must be positive, got {value}", self.id)));
            }
            self.mass = value;
        } else {
            self.properties.insert(name.to_string(), value);
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Property lookup is total: a missing property reads as zero.
    /// `"mass"` reads the mass.
    pub fn property(&self, name: &str) -> f64 {
        if name == MASS {
            return self.mass;
        }
        self.properties.get(name).copied().unwrap_or(0.0)
    }

    pub fn properties(&self) -> &Properties {
        &self.properties
    }

    pub fn momentum(&self) -> Vec3 {
        self.velocity * self.mass
    }

    pub(crate) fn with_state(&self, position: Vec3, velocity: Vec3) -> Body {
        Body {
            position,
            velocity,
            ..self.clone()
        }
    }
}

/// Relative position and relative velocity of body A with respect to body B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub x_ab: Vec3,
    pub v_ab: Vec3,
}

impl PairState {
    /// The state seen from the other body: both vectors change sign.
    pub fn exchanged(&self) -> PairState {
        PairState {
            x_ab: -self.x_ab,
            v_ab: -self.v_ab,
        }
    }

    pub fn distance(&self) -> f64 {
        self.x_ab.norm()
    }

    pub fn speed(&self) -> f64 {
        self.v_ab.norm()
    }

    /// `x_ab · v_ab`
    pub fn radial(&self) -> f64 {
        self.x_ab.dot(&self.v_ab)
    }
}

/// Relative state of `a` with respect to `b`. Both bodies must be expressed
/// in the same frame.
pub fn pair_state(a: &Body, b: &Body) -> PairState {
    PairState {
        x_ab: a.position - b.position,
        v_ab: a.velocity - b.velocity,
    }
}

/// Right-handed cross product.
pub fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    u.cross(v)
}

pub fn all_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Reduced mass of the pair.
pub fn reduced_mass(a: &Body, b: &Body) -> f64 {
    a.mass * b.mass / (a.mass + b.mass)
}

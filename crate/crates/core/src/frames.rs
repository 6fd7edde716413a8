//! Changes of observer: rotations and reflections of the axes, shifts of the
//! origin, Galilean boosts and offsets of the time origin.
//!
//! A transform acts on a body observed at time `t` as
//!
//! ```text
//! x ↦ R·x + translation + boost·(t + time_offset)
//! v ↦ R·v + boost
//! ```
//!
//! Mass and properties are untouched. Composition keeps time offsets
//! additive, which fixes a unique representative for every composite and
//! makes the group laws hold field by field.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion};
use rand::Rng;

use crate::error::Error;
use crate::types::{Body, Vec3};

pub type Mat3 = Matrix3<f64>;

/// Orthogonality tolerance used when a rotation is constructed.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    rotation: Mat3,
    pub translation: Vec3,
    pub boost: Vec3,
    pub time_offset: f64,
}

impl Default for FrameTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl FrameTransform {
    pub fn new(rotation: Mat3, translation: Vec3, boost: Vec3, time_offset: f64) -> Result<Self, Error> {
        let residual = orthogonality_residual(&rotation);
        if !(residual <= ORTHOGONALITY_TOL) {
            return Err(Error::NonOrthogonal { residual });
        }
        if !time_offset.is_finite() || !translation.iter().chain(boost.iter()).all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("frame transform fields must be finite".into()));
        }
        Ok(FrameTransform {
            rotation,
            translation,
            boost,
            time_offset,
        })
    }

    pub fn identity() -> Self {
        FrameTransform {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
            boost: Vec3::zeros(),
            time_offset: 0.0,
        }
    }

    pub fn pure_boost(boost: Vec3) -> Self {
        FrameTransform {
            boost,
            ..Self::identity()
        }
    }

    pub fn pure_translation(translation: Vec3) -> Self {
        FrameTransform {
            translation,
            ..Self::identity()
        }
    }

    pub fn pure_rotation(rotation: Mat3) -> Result<Self, Error> {
        Self::new(rotation, Vec3::zeros(), Vec3::zeros(), 0.0)
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn is_reflection(&self) -> bool {
        self.rotation.determinant() < 0.0
    }

    pub fn apply_position(&self, x: &Vec3, t: f64) -> Vec3 {
        self.rotation * x + self.translation + self.boost * (t + self.time_offset)
    }

    pub fn apply_velocity(&self, v: &Vec3) -> Vec3 {
        self.rotation * v + self.boost
    }

    /// Representation of `body`, observed at time `t`, in the new frame.
    pub fn apply(&self, body: &Body, t: f64) -> Body {
        body.with_state(self.apply_position(&body.position, t), self.apply_velocity(&body.velocity))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        let r1 = &self.rotation;
        FrameTransform {
            rotation: r1 * other.rotation,
            translation: r1 * other.translation + self.translation
                - (r1 * other.boost) * self.time_offset
                - self.boost * other.time_offset,
            boost: r1 * other.boost + self.boost,
            time_offset: self.time_offset + other.time_offset,
        }
    }

    pub fn inverse(&self) -> FrameTransform {
        let rt = self.rotation.transpose();
        FrameTransform {
            rotation: rt,
            translation: -(rt * (self.translation + self.boost * (2.0 * self.time_offset))),
            boost: -(rt * self.boost),
            time_offset: -self.time_offset,
        }
    }

    /// Largest absolute difference over all fields.
    pub fn max_field_difference(&self, other: &FrameTransform) -> f64 {
        let rot = (self.rotation - other.rotation).amax();
        let tr = (self.translation - other.translation).amax();
        let bo = (self.boost - other.boost).amax();
        rot.max(tr).max(bo).max((self.time_offset - other.time_offset).abs())
    }

    /// A random proper or improper rotation with uniformly distributed
    /// translation, boost and offset inside the given half-widths.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_translation: f64, max_boost: f64, max_offset: f64) -> Self {
        let mut rotation = random_rotation(rng);
        if rng.gen_bool(0.5) {
            rotation = -rotation;
        }
        FrameTransform {
            rotation,
            translation: random_vec(rng, max_translation),
            boost: random_vec(rng, max_boost),
            time_offset: rng.gen_range(-max_offset..=max_offset),
        }
    }
}

/// max |RᵀR − I|
pub fn orthogonality_residual(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).amax()
}

/// Uniformly distributed proper rotation (normalised Gaussian quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    loop {
        let q = Quaternion::new(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        if q.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
        }
    }
}

/// Rotation by `angle` about `axis`.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let axis = nalgebra::Unit::new_normalize(*axis);
    nalgebra::Rotation3::from_axis_angle(&axis, angle).into_inner()
}

pub fn random_vec<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> Vec3 {
    if half_width == 0.0 {
        return Vec3::zeros();
    }
    Vec3::new(
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
    )
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Outcome of evaluating a law in every representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectivityVerdict {
    pub passed: bool,
    /// Largest |F| found.
    pub worst_residual: f64,
    /// Label of the representation that produced it.
    pub worst_frame: Option<String>,
    pub tolerance: f64,
}

/// Checks that a law `F = 0` holds in every representation.
///
/// `law` maps one representation to the residual `F`; a non-finite residual
/// counts as a failure.
pub fn check_objectivity<T, F>(law: F, representations: &[(String, T)], tolerance: f64) -> ObjectivityVerdict
where
    F: Fn(&T) -> f64,
{
    let mut worst_residual = 0.0_f64;
    let mut worst_frame = None;
    let mut passed = true;
    for (label, rep) in representations {
        let r = law(rep).abs();
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r >= tolerance {
            passed = false;
        }
        if worst_frame.is_none() || r > worst_residual {
            worst_residual = r;
            worst_frame = Some(label.clone());
        }
    }
    ObjectivityVerdict {
        passed,
        worst_residual,
        worst_frame,
        tolerance,
    }
}

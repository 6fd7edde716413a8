use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use galileo_lab::dynamics::{momentum_rate, observables, potential, torque};
use galileo_lab::forces::{presets, ForceLaw};
use galileo_lab::frames::{axis_angle, FrameTransform};
use galileo_lab::nonlinear::{BoundedVelocity, GFunction};
use galileo_lab::{cross, pair_state, Body, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-r..r).prop_map(Vec3::from)
}

fn body_strategy() -> impl Strategy<Value = Body> {
    (0.1..10.0f64, vec3(5.0), vec3(3.0), -2.0..2.0f64)
        .prop_map(|(m, x, v, q)| Body::new("b", m, x, v).unwrap().with_property("charge", q).unwrap())
}

/// Pairs kept at least 0.2 apart so singular laws stay well conditioned.
fn pair_strategy() -> impl Strategy<Value = (Body, Body)> {
    (body_strategy(), body_strategy()).prop_filter("separated", |(a, b)| (a.position - b.position).norm() > 0.2)
}

fn laws() -> Vec<ForceLaw> {
    vec![
        presets::gravity(1.3),
        presets::coulomb(0.7, "charge"),
        presets::spring(2.0),
        presets::drag(0.4),
        presets::perpendicular(0.9),
        presets::quadratic_charge(0.5, "charge"),
        ForceLaw::sum(&[presets::spring(1.0), presets::drag(0.3), presets::perpendicular(-0.6)]),
    ]
}

fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn frame_strategy() -> impl Strategy<Value = FrameTransform> {
    any::<u64>().prop_map(|s| FrameTransform::random(&mut ChaCha8Rng::seed_from_u64(s), 10.0, 3.0, 5.0))
}

proptest! {
    #[test]
    fn cross_product_laws(u in vec3(10.0), v in vec3(10.0), w in vec3(10.0)) {
        let uv = cross(&u, &v);
        prop_assert!(close(&uv, &-cross(&v, &u), 1e-15));
        prop_assert!(uv.dot(&u).abs() <= 1e-12 * (1.0 + u.norm() * u.norm() * v.norm()));
        // a × (b × c) = b (a·c) − c (a·b)
        let lhs = cross(&u, &cross(&v, &w));
        let rhs = v * u.dot(&w) - w * u.dot(&v);
        prop_assert!(close(&lhs, &rhs, 1e-12));
        // component formula
        let direct = Vec3::new(u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x);
        prop_assert!(close(&uv, &direct, 1e-15));
    }

    #[test]
    fn frame_group_closure_and_action(f in frame_strategy(), g in frame_strategy(), x in vec3(5.0), v in vec3(3.0), t in -5.0..5.0f64) {
        // acting with g then f, both at time t, equals acting with f ∘ g
        let fg = f.compose(&g);
        let direct = f.apply_position(&g.apply_position(&x, t), t);
        prop_assert!(close(&fg.apply_position(&x, t), &direct, 1e-12));
        prop_assert!(close(&fg.apply_velocity(&v), &f.apply_velocity(&g.apply_velocity(&v)), 1e-12));
        let back = f.inverse().apply_position(&f.apply_position(&x, t), t);
        prop_assert!(close(&back, &x, 1e-12));
    }

    #[test]
    fn boosts_add_as_vectors(u in vec3(3.0), w in vec3(3.0)) {
        let composed = FrameTransform::pure_boost(u).compose(&FrameTransform::pure_boost(w));
        prop_assert!(close(&composed.boost, &(u + w), 1e-15));
        prop_assert!(composed.max_field_difference(&FrameTransform::pure_boost(w).compose(&FrameTransform::pure_boost(u))) < 1e-12);
    }

    #[test]
    fn relative_quantities_are_objective((a, b) in pair_strategy(), f in frame_strategy(), t in -5.0..5.0f64) {
        let p = pair_state(&a, &b);
        let q = pair_state(&f.apply(&a, t), &f.apply(&b, t));
        prop_assert!((p.distance() - q.distance()).abs() <= 1e-12 * (1.0 + p.distance()));
        prop_assert!((p.speed() - q.speed()).abs() <= 1e-12 * (1.0 + p.speed()));
        prop_assert!(close(&q.x_ab, &(f.rotation() * p.x_ab), 1e-12));
    }

    #[test]
    fn forces_rotate_with_the_frame((a, b) in pair_strategy(), f in frame_strategy(), t in -5.0..5.0f64) {
        let (fa, fb) = (f.apply(&a, t), f.apply(&b, t));
        let det = f.rotation().determinant();
        for law in laws() {
            let [_, _, pp] = law.coefficients(&a, &b).unwrap();
            let force = law.force_on_a(&a, &b).unwrap();
            let seen = law.force_on_a(&fa, &fb).unwrap();
            // the x × v term is an axial vector: it flips under reflections
            let perp = cross(&pair_state(&a, &b).x_ab, &pair_state(&a, &b).v_ab) * pp;
            let expected = f.rotation() * (force - perp) + f.rotation() * perp * det;
            prop_assert!(close(&seen, &expected, 1e-10), "{}", law.name());
        }
    }

    #[test]
    fn action_reaction_identity((a, b) in pair_strategy()) {
        for law in laws() {
            let (f, k) = law.force_pair(&a, &b).unwrap();
            let [pe, ps, pp] = law.coefficients(&a, &b).unwrap();
            let p = pair_state(&a, &b);
            let xv = cross(&p.x_ab, &p.v_ab);
            prop_assert!(close(&(f + k), &(xv * (2.0 * pp)), 1e-12));
            prop_assert!(close(&(f - k), &((p.x_ab * pe + p.v_ab * ps) * 2.0), 1e-12));
            prop_assert!(close(&k, &law.force_on_b(&a, &b).unwrap(), 1e-15));
            prop_assert!(close(&momentum_rate(&law, &a, &b).unwrap(), &(f + k), 1e-12));
        }
    }

    #[test]
    fn exchanging_the_bodies((a, b) in pair_strategy()) {
        // the laws are symmetric in the two bodies' properties, so the
        // force on B computed from B's side is the reaction k
        for law in laws() {
            let k = law.force_on_b(&a, &b).unwrap();
            let from_b = law.force_on_a(&b, &a).unwrap();
            prop_assert!(close(&k, &from_b, 1e-12), "{}", law.name());
        }
    }

    #[test]
    fn torque_formula_matches_direct_rate((a, b) in pair_strategy()) {
        // dL/dt = x × μ a_rel with a_rel = f/m_A − k/m_B
        for law in laws() {
            let (f, k) = law.force_pair(&a, &b).unwrap();
            let mu = a.mass() * b.mass() / (a.mass() + b.mass());
            let rel_acc = f / a.mass() - k / b.mass();
            let direct = cross(&pair_state(&a, &b).x_ab, &rel_acc) * mu;
            prop_assert!(close(&torque(&law, &a, &b).unwrap(), &direct, 1e-11), "{}", law.name());
        }
    }

    #[test]
    fn potential_gradient_is_the_force((a, b) in pair_strategy()) {
        let h = 1e-5;
        for law in [presets::gravity(1.3), presets::coulomb(0.7, "charge"), presets::spring(2.0), presets::quadratic_charge(0.5, "charge")] {
            let f = law.force_on_a(&a, &b).unwrap();
            let mut grad = Vec3::zeros();
            for i in 0..3 {
                let mut plus = a.clone();
                let mut minus = a.clone();
                plus.position[i] += h;
                minus.position[i] -= h;
                grad[i] = (potential(&law, &plus, &b).unwrap().unwrap() - potential(&law, &minus, &b).unwrap().unwrap()) / (2.0 * h);
            }
            prop_assert!(close(&-grad, &f, 1e-5), "{}: {:?} vs {:?}", law.name(), -grad, f);
        }
    }

    #[test]
    fn internal_energy_ignores_boosts((a, b) in pair_strategy(), w in vec3(5.0)) {
        let boost = FrameTransform::pure_boost(w);
        let law = presets::gravity(1.0);
        let e0 = observables(&a, &b, &law).unwrap().internal_energy.unwrap();
        let e1 = observables(&boost.apply(&a, 1.0), &boost.apply(&b, 1.0), &law).unwrap().internal_energy.unwrap();
        assert_relative_eq!(e0, e1, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn bounded_addition_laws(u in vec3(1.0), v in vec3(1.0), s in 0.0..0.999f64, t in 0.0..0.999f64) {
        prop_assume!(u.norm() > 1e-6 && v.norm() > 1e-6);
        for group in [GFunction::Lorentz { c: 1.0 }, GFunction::Rational { c: 1.0 }] {
            let bu = BoundedVelocity::new(u.normalize() * s, group).unwrap();
            let bv = BoundedVelocity::new(v.normalize() * t, group).unwrap();
            let w = bu.oplus(&bv).unwrap();
            prop_assert!(w.speed() < 1.0);
            prop_assert!(close(&w.vector(), &bv.oplus(&bu).unwrap().vector(), 1e-12));
            // g(W) W = g(U) U + g(V) V, compared on the scaled side
            let rhs = bu.scaled() + bv.scaled();
            prop_assert!((w.scaled() - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
            prop_assert!(bu.oplus(&bu.neg()).unwrap().vector().norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_by_axis_angle_keeps_lengths(axis in vec3(1.0), angle in -7.0..7.0f64, x in vec3(5.0)) {
        prop_assume!(axis.norm() > 1e-3);
        let r = axis_angle(&axis, angle);
        assert_relative_eq!((r * x).norm(), x.norm(), epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn lorentz_composition_adds_proper_velocities() {
    // collinear: r = u/sqrt(1-u^2) + v/sqrt(1-v^2), then w = r/sqrt(1+r^2)
    let g = GFunction::Lorentz { c: 1.0 };
    for (u, v) in [(0.6, 0.6), (0.9, -0.3), (0.99, 0.99), (0.1, 0.2)] {
        let w = BoundedVelocity::new(Vec3::new(u, 0.0, 0.0), g)
            .unwrap()
            .oplus(&BoundedVelocity::new(Vec3::new(v, 0.0, 0.0), g).unwrap())
            .unwrap();
        let r: f64 = u / (1.0 - u * u).sqrt() + v / (1.0 - v * v).sqrt();
        assert_relative_eq!(w.vector().x, r / (1.0 + r * r).sqrt(), epsilon = 1e-13);
    }
}

#[test]
fn galilean_group_is_vector_addition() {
    let g = GFunction::Galilean { c: 1.0 };
    let u = BoundedVelocity::new(Vec3::new(0.3, -2.0, 5.0), g).unwrap();
    let v = BoundedVelocity::new(Vec3::new(4.0, 1.0, -1.0), g).unwrap();
    assert_eq!(u.oplus(&v).unwrap().vector(), Vec3::new(4.3, -1.0, 4.0));
}

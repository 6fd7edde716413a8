//! Empirical studies of proper time under bounded velocity addition.
//! Findings are printed (run with `--nocapture`); only the chained
//! distance identity, which follows from associativity, is asserted.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use galileo_lab::audit::random_velocity;
use galileo_lab::nonlinear::{check_invariance_theorem, BoundedVelocity, GFunction};
use galileo_lab::Vec3;

const GROUPS: [GFunction; 2] = [GFunction::Lorentz { c: 1.0 }, GFunction::Rational { c: 1.0 }];

#[test]
fn invariance_in_general_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for g in GROUPS {
        let (mut collinear, mut general) = (0.0_f64, 0.0_f64);
        for _ in 0..1000 {
            let v2 = random_velocity(&mut rng, g, 0.99);
            let v3 = random_velocity(&mut rng, g, 0.99);
            let along = v2.vector().normalize() * v3.speed();
            let v3c = BoundedVelocity::new(along, g).unwrap();
            collinear = collinear.max(check_invariance_theorem(&v2, &v3c, 0.5).unwrap().relative_residual());
            general = general.max(check_invariance_theorem(&v2, &v3, 0.5).unwrap().relative_residual());
        }
        println!("{}: invariance residual collinear {collinear:.2e}, general directions {general:.2e}", g.name());
        assert!(collinear < 1e-12 && general < 1e-12);
    }
}

#[test]
fn proper_time_across_chained_additions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in GROUPS {
        let (mut chain_identity, mut multiplicative, mut order) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..1000 {
            let vs: Vec<BoundedVelocity> = (0..4).map(|_| random_velocity(&mut rng, g, 0.95)).collect();
            let total = vs[1..].iter().try_fold(vs[0], |acc, v| acc.oplus(v)).unwrap();
            // with Δt_i = ΔT g(V_i), V Δt = Σ V_i Δt_i along the whole chain
            let dt = 0.3;
            let lhs = total.vector() * (dt * total.g());
            let rhs: Vec3 = vs.iter().map(|v| v.vector() * (dt * v.g())).sum();
            chain_identity = chain_identity.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
            // does one proper-time rescaling equal the product of the steps?
            let uv = vs[0].oplus(&vs[1]).unwrap();
            multiplicative = multiplicative.max((uv.g() / (vs[0].g() * vs[1].g()) - 1.0).abs());
            // and does the grouping of a three-frame chain matter?
            let left = vs[0].oplus(&vs[1]).unwrap().oplus(&vs[2]).unwrap();
            let right = vs[0].oplus(&vs[1].oplus(&vs[2]).unwrap()).unwrap();
            order = order.max((left.g() - right.g()).abs() / left.g());
        }
        println!(
            "{}: chained distance identity {chain_identity:.2e}; \
             grouping changes g by {order:.2e}; \
             g(U+V) differs from g(U) g(V) by up to {:.1}%",
            g.name(),
            100.0 * multiplicative
        );
        assert!(chain_identity < 1e-9);
        assert!(multiplicative.is_finite() && order.is_finite());
    }
}

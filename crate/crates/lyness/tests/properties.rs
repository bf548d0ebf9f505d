//! Property-based invariance suite: conserved quantities, the surface
//! cofactor relation, the Lie symmetry condition, the branch discriminant
//! identity, and global 8-periodicity at a = 1, each over 1000 random
//! points per parameter value.

use lyness::geometry;
use lyness::map::{self, Params, Point3};
use lyness::flow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARAMS: [f64; 4] = [0.5, 1.0, 3.0, 8.3];
const N_POINTS: usize = 1000;

fn random_points(seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..N_POINTS)
        .map(|_| {
            Point3::new(
                rng.gen_range(0.05..10.0),
                rng.gen_range(0.05..10.0),
                rng.gen_range(0.05..10.0),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn first_integrals_are_preserved() {
    for &a in &PARAMS {
        let pr = Params::new(a).unwrap();
        for p in random_points(101) {
            let q = map::map_f(&p, &pr);
            let before = map::invariants(&p, &pr);
            let after = map::invariants(&q, &pr);
            assert!(
                (after.k - before.k).abs() <= 1e-12 * before.k.abs(),
                "V1 drifts at {p:?}, a = {a}"
            );
            assert!(
                (after.h - before.h).abs() <= 1e-12 * before.h.abs(),
                "V2 drifts at {p:?}, a = {a}"
            );
        }
    }
}

#[test]
fn surface_cofactor_relation() {
    // G(F(p)) = −((a + y + z)/x²)·G(p): the surface and its complement
    // regions are swapped with an explicit rational cofactor.
    for &a in &PARAMS {
        let pr = Params::new(a).unwrap();
        for p in random_points(102) {
            let q = map::map_f(&p, &pr);
            let lhs = map::g_value(&q, &pr);
            let rhs = -((a + p.y + p.z) / (p.x * p.x)) * map::g_value(&p, &pr);
            let scale = lhs.abs().max(rhs.abs()).max(1e-30);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * scale,
                "cofactor relation fails at {p:?}, a = {a}"
            );
        }
    }
}

#[test]
fn field_symmetry_condition() {
    // X(F(q)) = DF(q)·X(q): the flow of the field commutes with the map.
    for &a in &PARAMS {
        let pr = Params::new(a).unwrap();
        for p in random_points(103) {
            let lhs = flow::vector_field(&map::map_f(&p, &pr), &pr);
            let rhs = map::jacobian_f(&p, &pr) * flow::vector_field(&p, &pr);
            let scale = lhs.norm().max(rhs.norm()).max(1e-12);
            assert!(
                (lhs - rhs).norm() <= 1e-9 * scale,
                "symmetry condition fails at {p:?}, a = {a}"
            );
        }
    }
}

#[test]
fn branch_discriminant_identity() {
    // α² − Δ = 4(y+1)²(x+1)²(x+y+a), independent of the level k.
    for &a in &PARAMS {
        let pr = Params::new(a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for _ in 0..N_POINTS {
            let x = rng.gen_range(0.05..10.0);
            let y = rng.gen_range(0.05..10.0);
            let k = rng.gen_range(5.0..500.0);
            let b = geometry::z_branches_level1(x, y, &pr, k).unwrap();
            let rhs = 4.0 * (y + 1.0).powi(2) * (x + 1.0).powi(2) * (x + y + a);
            assert!(
                (b.alpha * b.alpha - b.delta - rhs).abs() <= 1e-10 * rhs.abs(),
                "discriminant identity fails at ({x}, {y}), k = {k}, a = {a}"
            );
        }
    }
}

#[test]
fn everything_is_eight_periodic_at_a_one() {
    let pr = Params::new(1.0).unwrap();
    for p in random_points(105) {
        let q = map::map_f_iter(&p, &pr, 8);
        let scale = p.norm_l1().max(1e-12);
        assert!(
            p.distance(&q) <= 1e-9 * scale,
            "F^8 differs from the identity at {p:?}"
        );
    }
}

mod common;

use common::{arb_network, random_function, rel_gap, rng};
use ernet_core::operators::energy;
use ernet_core::solvers::{defect_sequence, royden_split, solve_dipole, DefectVariant};
use ernet_core::ExhaustionPlan;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn three_vertices<R: Rng>(r: &mut R, n: usize) -> (usize, usize, usize) {
    let a = r.gen_range(0..n);
    let w = (a + r.gen_range(1..n)) % n;
    (a, w, r.gen_range(0..n))
}

proptest! {
    #[test]
    fn maximum_principle((net, seed) in arb_network(2, 60)) {
        let (a, w, o) = three_vertices(&mut rng(seed), net.vertex_count());
        let v = solve_dipole(&net, a, w, o).unwrap();
        let tol = 1e-10 * (v.get(a) - v.get(w));
        prop_assert!(v.get(a) > v.get(w));
        for x in 0..net.vertex_count() {
            prop_assert!(v.get(w) - tol <= v.get(x) && v.get(x) <= v.get(a) + tol);
        }
    }

    #[test]
    fn superposition((net, seed) in arb_network(3, 60)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let (a, w, o) = three_vertices(&mut r, n);
        let z = loop {
            let z = r.gen_range(0..n);
            if z != a && z != w {
                break z;
            }
        };
        let s = solve_dipole(&net, a, w, o)
            .unwrap()
            .add(&solve_dipole(&net, w, z, o).unwrap())
            .sub(&solve_dipole(&net, a, z, o).unwrap());
        prop_assert!(energy(&net, &s, &s).sqrt() < 1e-9);
    }

    #[test]
    fn royden_pythagoras((net, seed) in arb_network(4, 60)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let o = r.gen_range(0..n);
        let v = random_function(&mut r, n);
        let k = r.gen_range(0..4);
        let split = royden_split(&net, &v, o, &ExhaustionPlan::balls(o), k).unwrap();
        prop_assert!(rel_gap(split.energy, split.energy_fin + split.energy_harm) <= 1e-9);
        prop_assert!(split.cross.abs() <= 1e-9 * split.energy.max(1.0));
        prop_assert!(rel_gap(split.energy, energy(&net, &v, &v)) <= 1e-12);
    }

    #[test]
    fn defect_recursion_is_exact(num in 3u32..40, den in 1u32..8) {
        let c = f64::from(num) / f64::from(den) + 1.0;
        let seq = defect_sequence(c, DefectVariant::HalfLine, 20).unwrap();
        let r = num_rational::BigRational::from_float(c).unwrap().recip();
        prop_assert!(seq.p_exact(0).is_zero() && seq.q_exact(0).is_one());
        for n in 0..20 {
            let p_next = seq.p_exact(n) + seq.q_exact(n);
            prop_assert_eq!(seq.p_exact(n + 1), &p_next);
            let rn = num_traits::pow(r.clone(), n + 1);
            prop_assert_eq!(seq.q_exact(n + 1), &(seq.q_exact(n) + rn * &p_next));
        }
    }
}

#[test]
fn defect_float_mirror_tracks_rationals() {
    for c in [1.5, 1.75, 2.0, 2.5, 3.0, 10.0] {
        let seq = defect_sequence(c, DefectVariant::HalfLine, 40).unwrap();
        assert!(seq.float_agreement() <= 1e-12, "c = {c}: {}", seq.float_agreement());
    }
}

#[test]
fn grounding_is_exact() {
    let mut r = rng(3);
    let net = common::random_network(&mut r, 10, 30);
    for o in 0..net.vertex_count() {
        let v = solve_dipole(&net, 0, net.vertex_count() - 1, o).unwrap();
        assert_eq!(v.get(o), 0.0);
    }
}

mod common;

use common::rel_gap;
use ernet_core::lattice::{
    lattice_laplacian, lattice_monopole, lattice_resistance, lattice_rinf, lattice_vx, symbol, QuadratureGrid,
};
use ernet_core::{generate, resistance, GeneratorSpec, LatticeLayout};
use proptest::prelude::*;

fn within(q: ernet_core::lattice::QuadratureValue, expected: f64, slack: f64) -> bool {
    (q.value - expected).abs() <= q.error.max(slack)
}

proptest! {
    #[test]
    fn symbol_range(t in prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, 1..6)) {
        let s = symbol(&t);
        prop_assert!(s >= 0.0 && s <= 4.0 * t.len() as f64 + 1e-12);
        if t.iter().any(|&x| x != 0.0) {
            prop_assert!(s > 0.0);
        }
    }

    #[test]
    fn translation_invariance(
        x in prop::collection::vec(-3i64..3, 2),
        y in prop::collection::vec(-3i64..3, 2),
        z in prop::collection::vec(-5i64..5, 2),
    ) {
        let grid = QuadratureGrid::new(2).with_n(16);
        let a = lattice_resistance(&grid, &x, &y).unwrap();
        let xs: Vec<i64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
        let ys: Vec<i64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        let b = lattice_resistance(&grid, &xs, &ys).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-14);
        let c = lattice_resistance(&grid, &y, &x).unwrap();
        prop_assert!((a.value - c.value).abs() <= 1e-14);
    }
}

#[test]
fn neighbour_resistances_sum_to_one() {
    for d in 1..=4 {
        let grid = QuadratureGrid::new(d);
        let total: f64 = (0..d)
            .map(|k| {
                let mut e = vec![0; d];
                e[k] = 1;
                lattice_resistance(&grid, &vec![0; d], &e).unwrap().value
            })
            .sum();
        assert!((total - 1.0).abs() <= 1e-9, "d = {d}: {total}");
    }
}

#[test]
fn line_resistance_is_distance() {
    let grid = QuadratureGrid::new(1).with_n(256);
    for n in 1..6 {
        let q = lattice_resistance(&grid, &[0], &[n]).unwrap();
        assert!((q.value - n as f64).abs() <= 1e-9, "n = {n}: {q:?}");
    }
}

#[test]
fn square_lattice_diagonal() {
    let q = lattice_resistance(&QuadratureGrid::new(2), &[0, 0], &[1, 1]).unwrap();
    assert!(within(q, 2.0 / std::f64::consts::PI, 1e-9), "{q:?}");
}

#[test]
fn kernel_identities() {
    let grid = QuadratureGrid::new(3);
    let x = [1, 0, 0];
    let y = [1, 1, 1];
    let vxx = lattice_vx(&grid, &x, &x).unwrap().value;
    let vyy = lattice_vx(&grid, &y, &y).unwrap().value;
    let vxy = lattice_vx(&grid, &x, &y).unwrap().value;
    let r0x = lattice_resistance(&grid, &[0, 0, 0], &x).unwrap().value;
    let rxy = lattice_resistance(&grid, &x, &y).unwrap().value;
    assert!(rel_gap(vxx, r0x) <= 1e-6, "{vxx} vs {r0x}");
    assert!(rel_gap(vxx + vyy - 2.0 * vxy, rxy) <= 1e-6);
    assert!(rel_gap(vxy, lattice_vx(&grid, &y, &x).unwrap().value) <= 1e-12);
}

#[test]
fn monopole_has_point_source() {
    let grid = QuadratureGrid::new(3);
    let lap = |x: &[i64]| lattice_laplacian(x, |y| lattice_monopole(&grid, y).map(|q| q.value)).unwrap();
    assert!((lap(&[0, 0, 0]) + 1.0).abs() <= 1e-4);
    assert!(lap(&[1, 1, 0]).abs() <= 1e-4);
    let rinf = lattice_rinf(&grid).unwrap();
    let w0 = lattice_monopole(&grid, &[0, 0, 0]).unwrap();
    assert!(rel_gap(rinf.value, -2.0 * w0.value) <= 1e-12);
}

#[test]
fn recurrent_lattices_have_no_monopole() {
    assert!(lattice_rinf(&QuadratureGrid::new(2)).is_err());
    assert!(lattice_monopole(&QuadratureGrid::new(1), &[0]).is_err());
}

#[test]
fn bad_grids_are_rejected() {
    assert!(lattice_resistance(&QuadratureGrid::new(2).with_n(10), &[0, 0], &[1, 0]).is_err());
    assert!(lattice_resistance(&QuadratureGrid::new(7), &[0; 7], &[1, 0, 0, 0, 0, 0, 0]).is_err());
    assert!(lattice_resistance(&QuadratureGrid::new(2), &[0, 0], &[1]).is_err());
    assert!(lattice_rinf(&QuadratureGrid::new(3).with_levels(0)).is_err());
}

fn box_resistance(dim: usize, side: usize, z: &[i64]) -> f64 {
    let net = generate(&GeneratorSpec::LatticeBox { dim, side }).unwrap().net;
    let layout = LatticeLayout { dim, side };
    resistance(&net, layout.origin(), layout.index(z).unwrap()).unwrap()
}

#[test]
fn boxes_approach_the_lattice() {
    for z in [vec![1, 0], vec![1, 1], vec![2, 1]] {
        let lat = lattice_resistance(&QuadratureGrid::new(2), &[0, 0], &z).unwrap().value;
        let boxed = box_resistance(2, 21, &z);
        assert!(rel_gap(lat, boxed) <= 0.05, "{z:?}: {lat} vs {boxed}");
    }
    for z in [vec![1, 0, 0], vec![1, 1, 1]] {
        let lat = lattice_resistance(&QuadratureGrid::new(3), &[0, 0, 0], &z).unwrap().value;
        let boxed = box_resistance(3, 21, &z);
        assert!(rel_gap(lat, boxed) <= 0.05, "{z:?}: {lat} vs {boxed}");
    }
}

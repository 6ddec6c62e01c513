mod common;

use common::{arb_network, random_subset, rel_gap, rng};
use ernet_core::flows::min_dissipation_flow;
use ernet_core::operators::energy;
use ernet_core::resistance::{
    all_triples, check_metric, check_negative_semidefinite, free_resistance, resistance_matrix,
    resistance_report, trace_resistance, wired_resistance,
};
use ernet_core::solvers::solve_dipole;
use ernet_core::walk::forward_chain;
use ernet_core::{generate, resistance_finite, ExhaustionOptions, ExhaustionPlan, GeneratorSpec};
use proptest::prelude::*;
use rand::Rng;

fn pair<R: Rng>(r: &mut R, n: usize) -> (usize, usize) {
    let x = r.gen_range(0..n);
    (x, (x + r.gen_range(1..n)) % n)
}

proptest! {
    #[test]
    fn six_formulations_agree((net, seed) in arb_network(2, 50)) {
        let (x, y) = pair(&mut rng(seed), net.vertex_count());
        let fr = resistance_finite(&net, x, y).unwrap();
        prop_assert!(fr.six.spread() <= 1e-9, "{:?}", fr.six);
        prop_assert!(fr.six.derived_equal);
    }

    #[test]
    fn trace_matches_finite((net, seed) in arb_network(2, 50)) {
        let (x, y) = pair(&mut rng(seed), net.vertex_count());
        let r = resistance_finite(&net, x, y).unwrap().value;
        prop_assert!(rel_gap(trace_resistance(&net, x, y).unwrap(), r) <= 1e-9);
    }

    #[test]
    fn resistance_is_kernel_energy((net, seed) in arb_network(2, 50)) {
        let mut g = rng(seed);
        let n = net.vertex_count();
        let (x, y) = pair(&mut g, n);
        let o = g.gen_range(0..n);
        let kernel = |z: usize| {
            if z == o {
                ernet_core::VertexFunction::zeros(n)
            } else {
                solve_dipole(&net, z, o, o).unwrap()
            }
        };
        let d = kernel(x).sub(&kernel(y));
        let r = resistance_finite(&net, x, y).unwrap().value;
        prop_assert!(rel_gap(energy(&net, &d, &d), r) <= 1e-9);
    }

    #[test]
    fn exhaustion_sequences_are_monotone((net, seed) in arb_network(3, 50)) {
        let mut g = rng(seed);
        let n = net.vertex_count();
        let (x, y) = pair(&mut g, n);
        let plan = ExhaustionPlan::balls(g.gen_range(0..n));
        let opts = ExhaustionOptions { tol: 0.0, k_max: n };
        let free = free_resistance(&net, x, y, &plan, opts).unwrap();
        let wired = wired_resistance(&net, x, y, &plan, opts).unwrap();
        for w in free.trace.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9), "free rose: {:?}", free.trace);
        }
        for w in wired.trace.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 * (1.0 - 1e-9), "wired fell: {:?}", wired.trace);
        }
        for (k, rw) in &wired.trace {
            if let Some((_, rf)) = free.trace.iter().find(|(j, _)| j == k) {
                prop_assert!(*rw <= rf + 1e-9);
            }
        }
        let r = resistance_finite(&net, x, y).unwrap().value;
        prop_assert!(rel_gap(free.value, r) <= 1e-9 && rel_gap(wired.value, r) <= 1e-9);
    }

    #[test]
    fn resistance_is_a_metric((net, _) in arb_network(2, 15)) {
        let report = check_metric(&net, &all_triples(net.vertex_count())).unwrap();
        prop_assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn resistance_is_negative_semidefinite((net, seed) in arb_network(2, 30)) {
        let set = random_subset(&mut rng(seed), net.vertex_count(), 2);
        let report = check_negative_semidefinite(&net, &set, 20, seed).unwrap();
        prop_assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn matrix_agrees_with_pairs((net, seed) in arb_network(2, 25)) {
        let m = resistance_matrix(&net).unwrap();
        let (x, y) = pair(&mut rng(seed), net.vertex_count());
        prop_assert!(rel_gap(m[(x, y)], resistance_finite(&net, x, y).unwrap().value) <= 1e-9);
        prop_assert_eq!(m[(x, x)], 0.0);
    }
}

#[test]
fn deletion_bound() {
    let before = generate(&GeneratorSpec::DeletionExample { deleted: false }).unwrap().net;
    let after = generate(&GeneratorSpec::DeletionExample { deleted: true }).unwrap().net;
    let r0 = resistance_finite(&before, 0, 4).unwrap().value;
    let r1 = resistance_finite(&after, 0, 3).unwrap().value;
    let flow = min_dissipation_flow(&before, 0, 4, 0).unwrap();
    let eps = forward_chain(&before, &flow).unwrap().surviving_mass(&[(0, 2), (2, 3)]).unwrap();
    assert!((r0 - 10.0 / 11.0).abs() < 1e-14);
    assert!((r1 - 1.0).abs() < 1e-14);
    assert!((eps - 9.0 / 11.0).abs() < 1e-14);
    assert!(r0 <= r1 && r1 <= r0 / (eps * eps));
    assert!((r0 / (eps * eps) - 110.0 / 81.0).abs() < 1e-13);
}

#[test]
fn same_vertex_has_zero_resistance() {
    let net = generate(&GeneratorSpec::Cycle { n: 5 }).unwrap().net;
    assert_eq!(resistance_finite(&net, 2, 2).unwrap().value, 0.0);
    assert_eq!(trace_resistance(&net, 2, 2).unwrap(), 0.0);
}

#[test]
fn binary_tree_report_flags_a_gap() {
    let g = generate(&GeneratorSpec::BinaryTree { depth: 12 }).unwrap();
    let opts = ExhaustionOptions::default();
    let rep = resistance_report(&g.net, 1, 2, &g.plan, opts).unwrap();
    assert!(rep.finite.is_none() && rep.trace.is_none());
    assert!(rep.wired <= rep.free);
    assert!(rep.harmonic > 0.0);
    let bdy = rep.boundary.expect("positive harmonic part");
    assert!(!rep.boundary_infinite);
    assert!(rel_gap(bdy, rep.wired * rep.free / rep.harmonic) <= 1e-12);
    assert!(rep.traces.contains_key("free") && rep.traces.contains_key("wired"));
}

mod common;

use common::{arb_network, random_network, random_subset, rel_gap, rng};
use ernet_core::flows::min_dissipation_flow;
use ernet_core::operators::transition_prob;
use ernet_core::reduce::schur_trace;
use ernet_core::solvers::solve_dipole;
use ernet_core::walk::{
    escape_probability, escape_probability_exact, forward_chain, martingale_check, restricted_escape,
    restricted_escape_exact, Mode, WalkConfig,
};
use ernet_core::{generate, resistance_finite, GeneratorSpec};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn escape_times_resistance_is_one((net, seed) in arb_network(2, 60)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let a = r.gen_range(0..n);
        let b = (a + r.gen_range(1..n)) % n;
        let p = escape_probability_exact(&net, a, b).unwrap();
        let res = resistance_finite(&net, a, b).unwrap().value;
        prop_assert!((net.degree_weight(a) * p * res - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn restricted_escape_gives_trace_conductance((net, seed) in arb_network(3, 40)) {
        let mut r = rng(seed);
        let h = random_subset(&mut r, net.vertex_count(), 2);
        let t = schur_trace(&net, &h).unwrap();
        for (i, &x) in h.iter().enumerate() {
            for &y in &h[i + 1..] {
                let direct = net.conductance(x, y).unwrap_or(0.0);
                let p = restricted_escape_exact(&net, x, y, &h).unwrap();
                let via_walk = direct + net.degree_weight(x) * p;
                let schur = t.conductance(x, y).unwrap();
                prop_assert!((schur - via_walk).abs() <= 1e-9 * via_walk.max(1.0));
            }
        }
    }

    #[test]
    fn detailed_balance((net, _) in arb_network(2, 60)) {
        for e in net.edges() {
            let fwd = net.degree_weight(e.u) * transition_prob(&net, e.u, e.v);
            let back = net.degree_weight(e.v) * transition_prob(&net, e.v, e.u);
            prop_assert!(rel_gap(fwd, back) <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn forward_rows_are_stochastic((net, seed) in arb_network(2, 40)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let a = r.gen_range(0..n);
        let w = (a + r.gen_range(1..n)) % n;
        let flow = min_dissipation_flow(&net, a, w, w).unwrap();
        let chain = forward_chain(&net, &flow).unwrap();
        for x in 0..n {
            let row: Vec<(usize, f64)> = chain.transitions(x);
            if chain.activity(x) > 0.0 {
                let total: f64 = row.iter().map(|t| t.1).sum();
                prop_assert!((total - 1.0).abs() <= 1e-12);
                prop_assert!(row.iter().all(|t| t.1 > 0.0));
            } else {
                prop_assert!(row.is_empty());
            }
        }
        prop_assert_eq!(chain.activity(w), 0.0);
    }
}

#[test]
fn forward_chain_reproduces_the_current() {
    let mut r = rng(31);
    for _ in 0..30 {
        let net = random_network(&mut r, 2, 25);
        let n = net.vertex_count();
        let a = r.gen_range(0..n);
        let w = (a + r.gen_range(1..n)) % n;
        let flow = min_dissipation_flow(&net, a, w, w).unwrap();
        let chain = forward_chain(&net, &flow).unwrap();
        let masses = chain.edge_masses().unwrap();
        let gap = masses.sub(&flow).max_abs();
        assert!(gap <= 1e-9, "edge masses differ from the current by {gap}");
        assert!((chain.surviving_mass(&[]).unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn monte_carlo_matches_exact() {
    let mut r = rng(41);
    for trial in 0..6 {
        let net = random_network(&mut r, 2, 40);
        let n = net.vertex_count();
        let a = r.gen_range(0..n);
        let b = (a + r.gen_range(1..n)) % n;
        let est = escape_probability(&net, a, b, Mode::MonteCarlo(WalkConfig::with_seed(trial))).unwrap();
        assert_eq!(est.truncated, 0);
        assert!(est.within_sigma(3.0), "{est:?}");
    }
}

#[test]
fn restricted_monte_carlo_matches_exact() {
    let mut r = rng(42);
    for trial in 0..4 {
        let net = random_network(&mut r, 4, 30);
        let h = random_subset(&mut r, net.vertex_count(), 2);
        let (x, y) = (h[0], h[1]);
        let cfg = WalkConfig {
            samples: 40_000,
            ..WalkConfig::with_seed(100 + trial)
        };
        let est = restricted_escape(&net, x, y, &h, Mode::MonteCarlo(cfg)).unwrap();
        assert!(est.within_sigma(3.0), "{est:?}");
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let net = generate(&GeneratorSpec::LatticeBox { dim: 2, side: 5 }).unwrap().net;
    let cfg = WalkConfig {
        samples: 5_000,
        ..WalkConfig::with_seed(9)
    };
    let a = escape_probability(&net, 12, 0, Mode::MonteCarlo(cfg)).unwrap();
    let b = escape_probability(&net, 12, 0, Mode::MonteCarlo(cfg)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn harmonic_functions_are_martingales() {
    let net = generate(&GeneratorSpec::LatticeBox { dim: 2, side: 9 }).unwrap().net;
    let h = solve_dipole(&net, 0, 80, 80).unwrap();
    let cfg = WalkConfig {
        samples: 20_000,
        ..WalkConfig::with_seed(5)
    };
    let rep = martingale_check(&net, &h, 40, 3, &[], &cfg).unwrap();
    assert!(rep.max_interior_laplacian <= 1e-12);
    assert!(rep.within_sigma(4.0), "{rep:?}");
}

mod common;

use common::{arb_network, random_subset, rel_gap, rng};
use ernet_core::reduce::{replay, schur_trace, schur_trace_with, Reducer, ReductionLog, SchurMethod};
use ernet_core::{resistance, Network};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

// entries are bounded by the total conductance, which sets the rounding scale
fn total_conductance(net: &Network) -> f64 {
    net.edges().iter().map(|e| e.conductance).sum()
}

fn laplacian_checks(m: &nalgebra::DMatrix<f64>, scale: f64) -> Result<(), TestCaseError> {
    for i in 0..m.nrows() {
        let row: f64 = m.row(i).iter().sum();
        prop_assert!(row.abs() <= 1e-12 * scale * m.nrows() as f64, "row {} sums to {}", i, row);
        let off: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        prop_assert!(m[(i, i)] >= off - 1e-12 * scale * m.nrows() as f64);
        for j in 0..m.ncols() {
            prop_assert!((m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale);
            if i != j {
                prop_assert!(m[(i, j)] <= 1e-12 * scale);
            }
        }
    }
    Ok(())
}

proptest! {
    #[test]
    fn every_step_preserves_resistance((net, seed) in arb_network(3, 30)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let keep = random_subset(&mut r, n, 2);
        let mut order: Vec<usize> = (0..n).filter(|x| keep.binary_search(x).is_err()).collect();
        order.shuffle(&mut r);
        let mut red = Reducer::new(&net);
        for z in order {
            match red.degree(z) {
                2 => red.series(z).unwrap(),
                3 if r.gen_bool(0.5) => red.wye_delta(z).unwrap(),
                _ => red.schur_vertex(z).unwrap(),
            }
            let (small, ids) = red.to_network().unwrap();
            for _ in 0..3 {
                let i = r.gen_range(0..ids.len());
                let j = (i + r.gen_range(1..ids.len())) % ids.len();
                let before = resistance(&net, ids[i], ids[j]).unwrap();
                let after = resistance(&small, i, j).unwrap();
                prop_assert!(rel_gap(before, after) <= 1e-9, "{} vs {}", before, after);
            }
        }
        let log = red.log().clone();
        let back = ReductionLog::from_json_lines(&log.to_json_lines()).unwrap();
        prop_assert_eq!(&back, &log);
        let (replayed, ids) = replay(&net, &back).unwrap();
        let (direct, ids2) = red.to_network().unwrap();
        prop_assert_eq!(ids, ids2);
        prop_assert_eq!(replayed.to_netx(), direct.to_netx());
    }

    #[test]
    fn traces_are_laplacians((net, seed) in arb_network(2, 40)) {
        let keep = random_subset(&mut rng(seed), net.vertex_count(), 1);
        let t = schur_trace(&net, &keep).unwrap();
        laplacian_checks(&t.matrix, total_conductance(&net))?;
    }

    #[test]
    fn dense_and_elimination_traces_agree((net, seed) in arb_network(2, 40)) {
        let keep = random_subset(&mut rng(seed), net.vertex_count(), 1);
        let a = schur_trace_with(&net, &keep, SchurMethod::Dense).unwrap();
        let b = schur_trace_with(&net, &keep, SchurMethod::Elimination).unwrap();
        prop_assert!((&a.matrix - &b.matrix).amax() <= 1e-12 * total_conductance(&net));
    }

    #[test]
    fn traces_compose((net, seed) in arb_network(3, 40)) {
        let mut r = rng(seed);
        let n = net.vertex_count();
        let h1 = random_subset(&mut r, n, 2);
        let pick = random_subset(&mut r, h1.len(), 2);
        let h2: Vec<usize> = pick.iter().map(|&i| h1[i]).collect();
        let t1 = schur_trace(&net, &h1).unwrap();
        let t12 = schur_trace(&t1.network, &pick).unwrap();
        let t2 = schur_trace(&net, &h2).unwrap();
        prop_assert!((&t12.matrix - &t2.matrix).amax() <= 1e-9 * total_conductance(&net));
    }
}

fn random_hub<R: Rng>(r: &mut R, degree: usize) -> Network {
    let mut edges: Vec<(usize, usize, f64)> = (1..=degree).map(|x| (0, x, r.gen_range(0.1..10.0))).collect();
    // a rim so the neighbours are joined by existing edges as well
    for x in 1..degree {
        edges.push((x, x + 1, r.gen_range(0.1..10.0)));
    }
    Network::from_edges(degree + 1, edges).unwrap()
}

#[test]
fn schur_of_degree_two_is_series() {
    let mut r = rng(21);
    for _ in 0..20 {
        let net = random_hub(&mut r, 2);
        let (a, b) = (net.conductance(0, 1).unwrap(), net.conductance(0, 2).unwrap());
        let rim = net.conductance(1, 2).unwrap();
        let t = schur_trace(&net, &[1, 2]).unwrap();
        let expected = rim + 1.0 / (1.0 / a + 1.0 / b);
        assert!(rel_gap(t.conductance(1, 2).unwrap(), expected) <= 1e-14);
        let mut red = Reducer::new(&net);
        red.series(0).unwrap();
        assert!(rel_gap(red.conductance(1, 2).unwrap(), expected) <= 1e-14);
    }
}

#[test]
fn schur_of_degree_three_is_wye_delta() {
    let mut r = rng(22);
    for _ in 0..20 {
        let net = random_hub(&mut r, 3);
        let c: Vec<f64> = (1..=3).map(|x| net.conductance(0, x).unwrap()).collect();
        let total: f64 = c.iter().sum();
        let t = schur_trace(&net, &[1, 2, 3]).unwrap();
        let mut red = Reducer::new(&net);
        red.wye_delta(0).unwrap();
        for (x, y) in [(1, 2), (1, 3), (2, 3)] {
            let rim = net.conductance(x, y).unwrap_or(0.0);
            let expected = rim + c[x - 1] * c[y - 1] / total;
            assert!(rel_gap(t.conductance(x, y).unwrap(), expected) <= 1e-14);
            assert!(rel_gap(red.conductance(x, y).unwrap(), expected) <= 1e-14);
        }
    }
}

#[test]
fn wrong_degree_is_rejected() {
    let mut r = rng(23);
    let net = random_hub(&mut r, 4);
    let mut red = Reducer::new(&net);
    assert!(red.series(0).is_err());
    assert!(red.wye_delta(0).is_err());
}

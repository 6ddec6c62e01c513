#![allow(dead_code)]

use ernet_core::Network;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected network: a random recursive tree plus extra chords,
/// conductances uniform on `[0.1, 10]`.
pub fn random_network<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> Network {
    let n = rng.gen_range(min_n..=max_n);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v, rng.gen_range(0.1..=10.0)));
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b, rng.gen_range(0.1..=10.0)));
        }
    }
    Network::from_edges(n, edges).expect("connected by construction")
}

/// Random subset of `0..n` with at least `min` elements, sorted.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, min: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let k = rng.gen_range(min.min(n)..=n);
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Seeded source of random networks for property tests; the second value
/// seeds any further randomness the test needs.
pub fn arb_network(
    min_n: usize,
    max_n: usize,
) -> impl proptest::strategy::Strategy<Value = (Network, u64)> {
    use proptest::prelude::*;
    use rand::SeedableRng;
    (any::<u64>(), any::<u64>()).prop_map(move |(s, t)| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
        (random_network(&mut rng, min_n, max_n), t)
    })
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_function<R: Rng>(rng: &mut R, n: usize) -> ernet_core::VertexFunction {
    ernet_core::VertexFunction::raw((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect())
}

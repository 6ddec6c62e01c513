//! Random walks: exact hitting probabilities, Monte-Carlo estimators and the
//! forward chain of a current.
//!
//! Monte-Carlo walk `i` draws from `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `i`, so estimates do not depend on how rayon schedules work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaustion::membership;
use crate::functions::{Current, VertexFunction};
use crate::network::Network;
use crate::operators::{apply_laplacian, divergence, transition_prob};
use crate::solvers::{GroundedSystem, SolverKind, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            seed: 0,
            samples: 100_000,
            max_steps: 1_000_000,
        }
    }
}

impl WalkConfig {
    pub fn with_seed(seed: u64) -> Self {
        WalkConfig {
            seed,
            ..Self::default()
        }
    }

    fn rng(&self, walk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(walk as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    MonteCarlo(WalkConfig),
}

/// Result of a probability computation. In exact mode the interval is a point
/// and `samples` is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeEstimate {
    pub estimate: f64,
    pub ci95: (f64, f64),
    pub std_err: f64,
    pub samples: usize,
    /// Walks stopped at `max_steps`; excluded from the estimate.
    pub truncated: usize,
    /// More than 1% of walks were truncated.
    pub truncation_warning: bool,
    pub exact: Option<f64>,
}

impl EscapeEstimate {
    fn exact(p: f64) -> Self {
        EscapeEstimate {
            estimate: p,
            ci95: (p, p),
            std_err: 0.0,
            samples: 0,
            truncated: 0,
            truncation_warning: false,
            exact: Some(p),
        }
    }

    fn from_counts(hits: usize, finished: usize, truncated: usize, exact: f64) -> Self {
        let p = if finished == 0 { 0.0 } else { hits as f64 / finished as f64 };
        let std_err = if finished == 0 {
            f64::INFINITY
        } else {
            (p * (1.0 - p) / finished as f64).sqrt()
        };
        let total = finished + truncated;
        EscapeEstimate {
            estimate: p,
            ci95: (p - 1.96 * std_err, p + 1.96 * std_err),
            std_err,
            samples: finished,
            truncated,
            truncation_warning: total > 0 && truncated * 100 > total,
            exact: Some(exact),
        }
    }

    /// `|estimate − exact| ≤ k σ`, with exact-mode results compared directly.
    pub fn within_sigma(&self, k: f64) -> bool {
        match self.exact {
            Some(e) if self.samples == 0 => self.estimate == e,
            Some(e) => (self.estimate - e).abs() <= k * self.std_err,
            None => false,
        }
    }
}

/// `Π p(x_{k−1}, x_k)` along a vertex path.
pub fn path_probability(net: &Network, path: &[usize]) -> Result<f64> {
    for &x in path {
        net.check_vertex(x)?;
    }
    path.windows(2).try_fold(1.0, |acc, w| {
        if net.conductance(w[0], w[1]).is_none() {
            return Err(Error::NotAdjacent { from: w[0], to: w[1] });
        }
        Ok(acc * transition_prob(net, w[0], w[1]))
    })
}

/// Harmonic extension of `1` on `target`, `0` on `avoid`.
fn hitting_function(net: &Network, target: &[usize], avoid: &[usize]) -> Result<Vec<f64>> {
    let mut pins = Vec::with_capacity(target.len() + avoid.len());
    let mut values = Vec::with_capacity(pins.capacity());
    for &t in target {
        pins.push(t);
        values.push(1.0);
    }
    for &a in avoid {
        pins.push(a);
        values.push(0.0);
    }
    let n = net.vertex_count();
    if pins.len() == n {
        let mut out = vec![0.0; n];
        for (&p, &v) in pins.iter().zip(&values) {
            out[p] = v;
        }
        return Ok(out);
    }
    let sys = GroundedSystem::with_pins(net, &pins, SolverKind::Auto, DEFAULT_TOLERANCE)?;
    sys.solve(&vec![0.0; n], &values)
}

/// `P_start[τ_target < τ_avoid]`.
pub fn hit_before_exact(net: &Network, start: usize, target: usize, avoid: &[usize]) -> Result<f64> {
    net.check_vertex(start)?;
    net.check_vertex(target)?;
    for &a in avoid {
        net.check_vertex(a)?;
    }
    if avoid.contains(&target) {
        return Err(Error::InvalidParameter(format!("target {target} is also avoided")));
    }
    if start == target {
        return Ok(1.0);
    }
    if avoid.contains(&start) {
        return Ok(0.0);
    }
    if avoid.is_empty() {
        // a recurrent walk on a finite connected network hits every vertex
        return Ok(1.0);
    }
    Ok(hitting_function(net, &[target], avoid)?[start])
}

/// `P[a → b]`: the walk from `a` reaches `b` before returning to `a`.
pub fn escape_probability_exact(net: &Network, a: usize, b: usize) -> Result<f64> {
    net.check_vertex(a)?;
    net.check_vertex(b)?;
    if a == b {
        return Err(Error::InvalidParameter("escape needs distinct vertices".into()));
    }
    let h = hitting_function(net, &[b], &[a])?;
    Ok(net.neighbors(a).map(|(y, c)| c * h[y]).sum::<f64>() / net.degree_weight(a))
}

pub fn escape_probability(net: &Network, a: usize, b: usize, mode: Mode) -> Result<EscapeEstimate> {
    let exact = escape_probability_exact(net, a, b)?;
    match mode {
        Mode::Exact => Ok(EscapeEstimate::exact(exact)),
        Mode::MonteCarlo(cfg) => {
            let sampler = Sampler::new(net);
            let (hits, finished, truncated) = simulate(&cfg, |rng| {
                let mut x = sampler.step(a, rng);
                for _ in 1..cfg.max_steps {
                    if x == b {
                        return Outcome::Hit;
                    }
                    if x == a {
                        return Outcome::Miss;
                    }
                    x = sampler.step(x, rng);
                }
                match x {
                    _ if x == b => Outcome::Hit,
                    _ if x == a => Outcome::Miss,
                    _ => Outcome::Truncated,
                }
            });
            Ok(EscapeEstimate::from_counts(hits, finished, truncated, exact))
        }
    }
}

/// `P[x → y]|_{H^c}`: the walk from `x` reaches `y` with every intermediate
/// vertex outside `H`. The direct step `x → y` is not included.
pub fn restricted_escape_exact(net: &Network, x: usize, y: usize, h: &[usize]) -> Result<f64> {
    let inside = restricted_checks(net, x, y, h)?;
    let set: Vec<usize> = (0..net.vertex_count()).filter(|&v| inside[v]).collect();
    if set.len() == net.vertex_count() {
        return Ok(0.0);
    }
    let others: Vec<usize> = set.iter().copied().filter(|&v| v != y).collect();
    let hit = hitting_function(net, &[y], &others)?;
    Ok(net
        .neighbors(x)
        .filter(|&(z, _)| !inside[z])
        .map(|(z, c)| c * hit[z])
        .sum::<f64>()
        / net.degree_weight(x))
}

pub fn restricted_escape(net: &Network, x: usize, y: usize, h: &[usize], mode: Mode) -> Result<EscapeEstimate> {
    let exact = restricted_escape_exact(net, x, y, h)?;
    match mode {
        Mode::Exact => Ok(EscapeEstimate::exact(exact)),
        Mode::MonteCarlo(cfg) => {
            let inside = membership(net, h)?;
            let sampler = Sampler::new(net);
            let (hits, finished, truncated) = simulate(&cfg, |rng| {
                let mut z = sampler.step(x, rng);
                for _ in 1..=cfg.max_steps {
                    if inside[z] {
                        return Outcome::Miss;
                    }
                    z = sampler.step(z, rng);
                    if z == y {
                        return Outcome::Hit;
                    }
                }
                Outcome::Truncated
            });
            Ok(EscapeEstimate::from_counts(hits, finished, truncated, exact))
        }
    }
}

fn restricted_checks(net: &Network, x: usize, y: usize, h: &[usize]) -> Result<Vec<bool>> {
    let inside = membership(net, h)?;
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        return Err(Error::InvalidParameter("restricted escape needs distinct vertices".into()));
    }
    if !inside[x] || !inside[y] {
        return Err(Error::InvalidParameter(format!("{x} and {y} must both lie in H")));
    }
    Ok(inside)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub start: usize,
    pub steps: usize,
    pub h_start: f64,
    /// Monte-Carlo estimate of `E[h(X_n)]`.
    pub estimate: f64,
    pub std_err: f64,
    pub ci95: (f64, f64),
    pub samples: usize,
    /// Walks that touched a frontier vertex before step `n`; excluded.
    pub frontier_hits: usize,
    /// `max |Δh|` over non-frontier vertices within `n − 1` steps of the start.
    pub max_interior_laplacian: f64,
}

impl MartingaleReport {
    pub fn within_sigma(&self, k: f64) -> bool {
        (self.estimate - self.h_start).abs() <= k * self.std_err
    }
}

/// Checks `h(x) = E[h(X_n) | X_0 = x]` by simulation. Vertices in `frontier`
/// mark where a truncated network stops being faithful.
pub fn martingale_check(
    net: &Network,
    h: &VertexFunction,
    x: usize,
    n: usize,
    frontier: &[usize],
    cfg: &WalkConfig,
) -> Result<MartingaleReport> {
    net.check_vertex(x)?;
    if h.len() != net.vertex_count() {
        return Err(Error::InvalidParameter("function length does not match the network".into()));
    }
    let edge = membership(net, frontier)?;
    let lap = apply_laplacian(net, h);
    let mut dist = vec![usize::MAX; net.vertex_count()];
    dist[x] = 0;
    let mut queue = std::collections::VecDeque::from([x]);
    let mut max_lap: f64 = 0.0;
    while let Some(v) = queue.pop_front() {
        if dist[v] >= n || edge[v] {
            continue;
        }
        max_lap = max_lap.max(lap.get(v).abs());
        for (w, _) in net.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }

    let sampler = Sampler::new(net);
    let hx = h.get(x);
    // deviations from h(x), so a constant h gives exactly zero
    let results: Vec<Option<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng(i);
            let mut z = x;
            for _ in 0..n {
                if edge[z] {
                    return None;
                }
                z = sampler.step(z, &mut rng);
            }
            Some(h.get(z) - hx)
        })
        .collect();
    let devs: Vec<f64> = results.iter().flatten().copied().collect();
    let m = devs.len();
    let mean = if m == 0 { 0.0 } else { devs.iter().sum::<f64>() / m as f64 };
    let var = if m < 2 {
        0.0
    } else {
        devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1) as f64
    };
    let std_err = (var / m.max(1) as f64).sqrt();
    let estimate = hx + mean;
    Ok(MartingaleReport {
        start: x,
        steps: n,
        h_start: hx,
        estimate,
        std_err,
        ci95: (estimate - 1.96 * std_err, estimate + 1.96 * std_err),
        samples: m,
        frontier_hits: cfg.samples - m,
        max_interior_laplacian: max_lap,
    })
}

enum Outcome {
    Hit,
    Miss,
    Truncated,
}

/// Runs `cfg.samples` walks and returns `(hits, finished, truncated)`.
fn simulate<F>(cfg: &WalkConfig, walk: F) -> (usize, usize, usize)
where
    F: Fn(&mut ChaCha8Rng) -> Outcome + Sync,
{
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| match walk(&mut cfg.rng(i)) {
            Outcome::Hit => (1, 1, 0),
            Outcome::Miss => (0, 1, 0),
            Outcome::Truncated => (0, 0, 1),
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
}

/// Neighbour sampling by inverse CDF over cumulative conductances.
struct Sampler<'a> {
    net: &'a Network,
    cumulative: Vec<Vec<f64>>,
    targets: Vec<Vec<usize>>,
}

impl<'a> Sampler<'a> {
    fn new(net: &'a Network) -> Self {
        let mut cumulative = Vec::with_capacity(net.vertex_count());
        let mut targets = Vec::with_capacity(net.vertex_count());
        for x in 0..net.vertex_count() {
            let mut acc = 0.0;
            let (c, t): (Vec<f64>, Vec<usize>) = net
                .neighbors(x)
                .map(|(y, c)| {
                    acc += c;
                    (acc, y)
                })
                .unzip();
            cumulative.push(c);
            targets.push(t);
        }
        Sampler {
            net,
            cumulative,
            targets,
        }
    }

    fn step(&self, x: usize, rng: &mut ChaCha8Rng) -> usize {
        let cum = &self.cumulative[x];
        let u = rng.gen::<f64>() * self.net.degree_weight(x);
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.targets[x][i]
    }
}

/// The Markov chain driven by a current: from `x`, step to a forward
/// neighbour `y` with probability `I(x, y) / act(x)`, where `act(x)` is the
/// total outflow at `x`.
#[derive(Debug, Clone)]
pub struct ForwardChain<'a> {
    net: &'a Network,
    current: Current,
    activity: Vec<f64>,
    /// Net supply `div I`, positive at sources.
    supply: Vec<f64>,
}

pub fn forward_chain<'a>(net: &'a Network, current: &Current) -> Result<ForwardChain<'a>> {
    if current.values().len() != net.edge_count() {
        return Err(Error::InvalidParameter("current length does not match the network".into()));
    }
    if current.max_abs() == 0.0 {
        return Err(Error::InvalidParameter("forward chain needs a nonzero current".into()));
    }
    let activity = (0..net.vertex_count())
        .map(|x| {
            net.incident(x)
                .map(|(y, _, idx)| current.oriented(idx, x < y).max(0.0))
                .sum()
        })
        .collect();
    let supply = divergence(net, current).into_values();
    Ok(ForwardChain {
        net,
        current: current.clone(),
        activity,
        supply,
    })
}

impl ForwardChain<'_> {
    pub fn activity(&self, x: usize) -> f64 {
        self.activity[x]
    }

    /// Forward neighbours of `x` with their transition probabilities.
    pub fn transitions(&self, x: usize) -> Vec<(usize, f64)> {
        if self.activity[x] == 0.0 {
            return Vec::new();
        }
        self.net
            .incident(x)
            .filter_map(|(y, _, idx)| {
                let i = self.current.oriented(idx, x < y);
                (i > 0.0).then(|| (y, i / self.activity[x]))
            })
            .collect()
    }

    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.transitions(x)
            .into_iter()
            .find(|t| t.0 == y)
            .map_or(0.0, |t| t.1)
    }

    /// `Σ_{y ∈ fwd(x)} c_xy (v(x) − v(y))`.
    pub fn forward_laplacian(&self, v: &VertexFunction) -> VertexFunction {
        let vals = v.values();
        VertexFunction::raw(
            (0..self.net.vertex_count())
                .map(|x| {
                    self.net
                        .incident(x)
                        .filter(|&(y, _, idx)| self.current.oriented(idx, x < y) > 0.0)
                        .map(|(y, c, _)| c * (vals[x] - vals[y]))
                        .sum()
                })
                .collect(),
        )
    }

    /// `Π I(x_{k−1}, x_k) / act(x_{k−1})`; zero if a step runs against the current.
    pub fn path_probability(&self, path: &[usize]) -> Result<f64> {
        for &x in path {
            self.net.check_vertex(x)?;
        }
        path.windows(2).try_fold(1.0, |acc, w| {
            if self.net.conductance(w[0], w[1]).is_none() {
                return Err(Error::NotAdjacent { from: w[0], to: w[1] });
            }
            Ok(acc * self.transition(w[0], w[1]))
        })
    }

    /// Vertices in an order where every forward edge points later.
    fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.net.vertex_count();
        let mut indeg = vec![0usize; n];
        for x in 0..n {
            for (y, _) in self.transitions(x) {
                indeg[y] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&x| indeg[x] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(x) = ready.pop() {
            order.push(x);
            for (y, _) in self.transitions(x) {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    ready.push(y);
                }
            }
        }
        if order.len() < n {
            return Err(Error::Unsupported("the current has a directed cycle".into()));
        }
        Ok(order)
    }

    /// Path mass carried by each forward edge: paths start at sources with
    /// weight `div I` and follow the chain. Edges in `deleted` carry nothing.
    fn masses(&self, deleted: &[(usize, usize)]) -> Result<(Vec<f64>, Vec<f64>)> {
        let blocked = |x: usize, y: usize| deleted.iter().any(|&(a, b)| (a, b) == (x, y) || (a, b) == (y, x));
        let n = self.net.vertex_count();
        let mut mass: Vec<f64> = self.supply.iter().map(|s| s.max(0.0)).collect();
        let mut edge = vec![0.0; self.net.edge_count()];
        for x in self.topological_order()? {
            for (y, p) in self.transitions(x) {
                if blocked(x, y) {
                    continue;
                }
                let m = mass[x] * p;
                mass[y] += m;
                let idx = self.net.edge_index(x, y).expect("adjacent");
                edge[idx] += if x < y { m } else { -m };
            }
        }
        let absorbed = (0..n)
            .map(|x| if self.activity[x] == 0.0 { mass[x] } else { 0.0 })
            .collect();
        Ok((edge, absorbed))
    }

    /// `Σ_{γ ∋ (x,y)} P(γ)` for every edge, as a current. Equals `I` when the
    /// current is acyclic.
    pub fn edge_masses(&self) -> Result<Current> {
        Ok(Current::from_values(self.masses(&[])?.0))
    }

    /// Total probability of source-to-sink paths that avoid the `deleted` edges.
    pub fn surviving_mass(&self, deleted: &[(usize, usize)]) -> Result<f64> {
        Ok(self.masses(deleted)?.1.iter().sum())
    }

    /// Every source-to-sink path with its probability, in lexicographic order.
    /// Fails once more than `limit` paths exist.
    pub fn paths(&self, limit: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        self.topological_order()?;
        let mut out = Vec::new();
        for s in 0..self.net.vertex_count() {
            if self.supply[s] > 0.0 {
                let mut path = vec![s];
                self.extend(&mut path, self.supply[s], &mut out, limit)?;
            }
        }
        Ok(out)
    }

    fn extend(&self, path: &mut Vec<usize>, p: f64, out: &mut Vec<(Vec<usize>, f64)>, limit: usize) -> Result<()> {
        let x = *path.last().expect("nonempty");
        let mut next = self.transitions(x);
        if next.is_empty() {
            if out.len() == limit {
                return Err(Error::Unsupported(format!("more than {limit} current paths")));
            }
            out.push((path.clone(), p));
            return Ok(());
        }
        next.sort_by_key(|t| t.0);
        for (y, q) in next {
            path.push(y);
            self.extend(path, p * q, out, limit)?;
            path.pop();
        }
        Ok(())
    }
}

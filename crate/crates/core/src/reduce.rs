//! Exact network reduction: series, parallel, ∇-Y and Schur-complement
//! (star-mesh) elimination, with a replayable log.
//!
//! Reductions keep the original vertex ids. When a reduced network is
//! materialized as a [`Network`], the surviving vertices are renumbered in
//! increasing original-id order.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::membership;
use crate::linalg::EliminationGraph;
use crate::network::Network;

/// One reduction step, in terms of original vertex ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ReductionStep {
    /// Degree-2 vertex `removed` replaced by one edge `{x, y}` of conductance `added`.
    Series {
        removed: usize,
        x: usize,
        y: usize,
        c_x: f64,
        c_y: f64,
        added: f64,
    },
    /// A new conductance landed on an existing edge and was merged.
    Parallel {
        x: usize,
        y: usize,
        before: f64,
        added: f64,
        after: f64,
    },
    /// Degree-3 vertex `removed` replaced by a triangle.
    WyeDelta {
        removed: usize,
        neighbors: [usize; 3],
        conductances: [f64; 3],
        added: [f64; 3],
    },
    /// Vertices eliminated by star-mesh (Schur complement), in order.
    Schur { eliminated: Vec<usize> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionLog {
    pub steps: Vec<ReductionStep>,
}

impl ReductionLog {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("steps serialize") + "\n")
            .collect()
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let steps = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(ReductionLog { steps })
    }
}

/// A network under reduction, addressed by original ids.
#[derive(Debug, Clone)]
pub struct Reducer {
    adj: Vec<BTreeMap<usize, f64>>,
    active: Vec<bool>,
    log: ReductionLog,
}

impl Reducer {
    pub fn new(net: &Network) -> Self {
        let mut adj = vec![BTreeMap::new(); net.vertex_count()];
        for e in net.edges() {
            adj[e.u].insert(e.v, e.conductance);
            adj[e.v].insert(e.u, e.conductance);
        }
        Reducer {
            adj,
            active: vec![true; net.vertex_count()],
            log: ReductionLog::default(),
        }
    }

    pub fn log(&self) -> &ReductionLog {
        &self.log
    }

    pub fn into_log(self) -> ReductionLog {
        self.log
    }

    pub fn active_vertices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&x| self.active[x]).collect()
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn conductance(&self, x: usize, y: usize) -> Option<f64> {
        self.adj[x].get(&y).copied()
    }

    fn check_active(&self, x: usize) -> Result<()> {
        if x < self.active.len() && self.active[x] {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: x,
                count: self.active.len(),
            })
        }
    }

    fn remove(&mut self, z: usize) -> Vec<(usize, f64)> {
        let links: Vec<(usize, f64)> = std::mem::take(&mut self.adj[z]).into_iter().collect();
        for &(x, _) in &links {
            self.adj[x].remove(&z);
        }
        self.active[z] = false;
        links
    }

    fn add_edge(&mut self, x: usize, y: usize, c: f64) {
        match self.adj[x].get(&y).copied() {
            Some(before) => {
                let after = before + c;
                self.adj[x].insert(y, after);
                self.adj[y].insert(x, after);
                self.log.steps.push(ReductionStep::Parallel {
                    x: x.min(y),
                    y: x.max(y),
                    before,
                    added: c,
                    after,
                });
            }
            None => {
                self.adj[x].insert(y, c);
                self.adj[y].insert(x, c);
            }
        }
    }

    /// Series rule at a degree-2 vertex: `c = (1/c_xz + 1/c_zy)^{-1}`.
    pub fn series(&mut self, z: usize) -> Result<()> {
        self.check_active(z)?;
        let d = self.degree(z);
        if d != 2 {
            return Err(Error::DegreeMismatch {
                vertex: z,
                expected: 2,
                found: d,
            });
        }
        let links = self.remove(z);
        let ((x, cx), (y, cy)) = (links[0], links[1]);
        let added = 1.0 / (1.0 / cx + 1.0 / cy);
        self.log.steps.push(ReductionStep::Series {
            removed: z,
            x,
            y,
            c_x: cx,
            c_y: cy,
            added,
        });
        self.add_edge(x, y, added);
        Ok(())
    }

    /// ∇-Y rule at a degree-3 vertex: `c_xy = c_xt c_ty / c(t)`.
    pub fn wye_delta(&mut self, t: usize) -> Result<()> {
        self.check_active(t)?;
        let d = self.degree(t);
        if d != 3 {
            return Err(Error::DegreeMismatch {
                vertex: t,
                expected: 3,
                found: d,
            });
        }
        let links = self.remove(t);
        let total: f64 = links.iter().map(|l| l.1).sum();
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let added = pairs.map(|(i, j)| links[i].1 * links[j].1 / total);
        self.log.steps.push(ReductionStep::WyeDelta {
            removed: t,
            neighbors: [links[0].0, links[1].0, links[2].0],
            conductances: [links[0].1, links[1].1, links[2].1],
            added,
        });
        for ((i, j), c) in pairs.into_iter().zip(added) {
            self.add_edge(links[i].0, links[j].0, c);
        }
        Ok(())
    }

    /// Star-mesh elimination of one vertex of any degree.
    pub fn schur_vertex(&mut self, z: usize) -> Result<()> {
        self.check_active(z)?;
        self.log.steps.push(ReductionStep::Schur { eliminated: vec![z] });
        self.star_mesh(z);
        Ok(())
    }

    fn star_mesh(&mut self, z: usize) {
        let links = self.remove(z);
        let total: f64 = links.iter().map(|l| l.1).sum();
        for (i, &(x, cx)) in links.iter().enumerate() {
            for &(y, cy) in &links[i + 1..] {
                self.add_edge(x, y, cx * cy / total);
            }
        }
    }

    /// Replays one logged step, checking recorded values bit-for-bit.
    pub fn apply(&mut self, step: &ReductionStep) -> Result<()> {
        let mismatch = |what: &str| Error::InvalidParameter(format!("replay mismatch in {what} step"));
        let before = self.log.steps.len();
        match step {
            ReductionStep::Series { removed, added, .. } => {
                self.series(*removed)?;
                match &self.log.steps[before] {
                    ReductionStep::Series { added: a, .. } if a == added => {}
                    _ => return Err(mismatch("series")),
                }
                // a parallel merge, if any, is replayed by the following logged step
                self.log.steps.truncate(before + 1);
            }
            ReductionStep::WyeDelta { removed, added, .. } => {
                self.wye_delta(*removed)?;
                match &self.log.steps[before] {
                    ReductionStep::WyeDelta { added: a, .. } if a == added => {}
                    _ => return Err(mismatch("wye-delta")),
                }
                self.log.steps.truncate(before + 1);
            }
            ReductionStep::Parallel { x, y, after, .. } => {
                if self.conductance(*x, *y) != Some(*after) {
                    return Err(mismatch("parallel"));
                }
                self.log.steps.push(step.clone());
            }
            ReductionStep::Schur { eliminated } => {
                for &z in eliminated {
                    self.check_active(z)?;
                }
                for &z in eliminated {
                    self.star_mesh(z);
                }
                self.log.steps.truncate(before);
                self.log.steps.push(step.clone());
            }
        }
        Ok(())
    }

    /// Materializes the surviving vertices as a network (renumbered in
    /// increasing original-id order) and returns the id map.
    pub fn to_network(&self) -> Result<(Network, Vec<usize>)> {
        let keep = self.active_vertices();
        let mut slot = vec![usize::MAX; self.active.len()];
        for (i, &x) in keep.iter().enumerate() {
            slot[x] = i;
        }
        let edges = keep.iter().flat_map(|&x| {
            self.adj[x]
                .iter()
                .filter(move |(&y, _)| y > x)
                .map(|(&y, &c)| (x, y, c))
                .collect::<Vec<_>>()
        });
        let edges: Vec<_> = edges.map(|(x, y, c)| (slot[x], slot[y], c)).collect();
        Ok((Network::from_edges(keep.len(), edges)?, keep))
    }
}

/// Applies the series rule at `z`.
pub fn series_reduce(net: &Network, z: usize) -> Result<(Network, ReductionLog)> {
    let mut r = Reducer::new(net);
    r.series(z)?;
    Ok((r.to_network()?.0, r.into_log()))
}

/// Applies the ∇-Y rule at `t`.
pub fn wye_delta(net: &Network, t: usize) -> Result<(Network, ReductionLog)> {
    let mut r = Reducer::new(net);
    r.wye_delta(t)?;
    Ok((r.to_network()?.0, r.into_log()))
}

/// Replays a log against `net`.
pub fn replay(net: &Network, log: &ReductionLog) -> Result<(Network, Vec<usize>)> {
    let mut r = Reducer::new(net);
    for step in &log.steps {
        r.apply(step)?;
    }
    r.to_network()
}

/// Eliminates every vertex outside `keep` by repeatedly applying the series
/// rule, then ∇-Y, then single-vertex Schur elimination (lowest degree,
/// lowest id).
pub fn reduce_to(net: &Network, keep: &[usize]) -> Result<Reducer> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter("keep set must be nonempty".into()));
    }
    let inside = membership(net, keep)?;
    let mut r = Reducer::new(net);
    loop {
        let candidates: Vec<usize> = r
            .active_vertices()
            .into_iter()
            .filter(|&z| !inside[z])
            .collect();
        if candidates.is_empty() {
            return Ok(r);
        }
        if let Some(&z) = candidates.iter().find(|&&z| r.degree(z) == 2) {
            r.series(z)?;
        } else if let Some(&z) = candidates.iter().find(|&&z| r.degree(z) == 3) {
            r.wye_delta(z)?;
        } else {
            let &z = candidates
                .iter()
                .min_by_key(|&&z| (r.degree(z), z))
                .expect("nonempty");
            r.schur_vertex(z)?;
        }
    }
}

/// Reduces to the single edge `{x, y}` and returns its conductance.
pub fn reduce_to_pair(net: &Network, x: usize, y: usize) -> Result<(f64, ReductionLog)> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        return Err(Error::InvalidParameter("reduction needs two distinct terminals".into()));
    }
    let r = reduce_to(net, &[x, y])?;
    let c = r
        .conductance(x, y)
        .ok_or(Error::Singular("terminals ended up disconnected".into()))?;
    Ok((c, r.into_log()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchurMethod {
    /// Dense block solve up to [`DENSE_SCHUR_LIMIT`] eliminated vertices.
    #[default]
    Auto,
    Dense,
    Elimination,
}

pub const DENSE_SCHUR_LIMIT: usize = 2000;

/// The trace of the Laplacian on a kept vertex set.
#[derive(Debug, Clone)]
pub struct SchurTrace {
    /// Kept vertices in the order used by `matrix` and `network`.
    pub keep: Vec<usize>,
    /// `A − Bᵀ D⁻¹ B`.
    pub matrix: DMatrix<f64>,
    /// Network rebuilt from the negated off-diagonals.
    pub network: Network,
}

impl SchurTrace {
    /// Trace conductance between kept vertices `x` and `y` (original ids).
    pub fn conductance(&self, x: usize, y: usize) -> Option<f64> {
        let i = self.keep.iter().position(|&k| k == x)?;
        let j = self.keep.iter().position(|&k| k == y)?;
        Some(-self.matrix[(i, j)])
    }
}

pub fn schur_trace(net: &Network, keep: &[usize]) -> Result<SchurTrace> {
    schur_trace_with(net, keep, SchurMethod::Auto)
}

pub fn schur_trace_with(net: &Network, keep: &[usize], method: SchurMethod) -> Result<SchurTrace> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter("keep set must be nonempty".into()));
    }
    let inside = membership(net, keep)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let n = net.vertex_count();
    let eliminated = n - keep.len();
    let dense = match method {
        SchurMethod::Auto => eliminated <= DENSE_SCHUR_LIMIT,
        SchurMethod::Dense => true,
        SchurMethod::Elimination => false,
    };
    let matrix = if dense {
        dense_trace(net, &keep, &inside)?
    } else {
        let mut g = EliminationGraph::new(n);
        for e in net.edges() {
            g.add_link(e.u, e.v, e.conductance);
        }
        g.reduce_to(&inside)?;
        let k = keep.len();
        let mut m = DMatrix::zeros(k, k);
        for (i, &x) in keep.iter().enumerate() {
            m[(i, i)] = g.diag(x);
            for (j, &y) in keep.iter().enumerate() {
                if i != j {
                    m[(i, j)] = -g.link(x, y);
                }
            }
        }
        m
    };
    let network = rebuild(&matrix)?;
    Ok(SchurTrace {
        keep,
        matrix,
        network,
    })
}

fn dense_trace(net: &Network, keep: &[usize], inside: &[bool]) -> Result<DMatrix<f64>> {
    let n = net.vertex_count();
    let elim: Vec<usize> = (0..n).filter(|&x| !inside[x]).collect();
    let mut kslot = vec![usize::MAX; n];
    let mut eslot = vec![usize::MAX; n];
    for (i, &x) in keep.iter().enumerate() {
        kslot[x] = i;
    }
    for (i, &x) in elim.iter().enumerate() {
        eslot[x] = i;
    }
    let (k, m) = (keep.len(), elim.len());
    let mut a = DMatrix::zeros(k, k);
    let mut b = DMatrix::zeros(m, k);
    let mut d = DMatrix::zeros(m, m);
    for x in 0..n {
        let cx = net.degree_weight(x);
        if inside[x] {
            a[(kslot[x], kslot[x])] = cx;
        } else {
            d[(eslot[x], eslot[x])] = cx;
        }
        for (y, c) in net.neighbors(x) {
            match (inside[x], inside[y]) {
                (true, true) => a[(kslot[x], kslot[y])] = -c,
                (false, false) => d[(eslot[x], eslot[y])] = -c,
                (false, true) => b[(eslot[x], kslot[y])] = -c,
                (true, false) => {}
            }
        }
    }
    if m == 0 {
        return Ok(a);
    }
    let chol = d
        .cholesky()
        .ok_or_else(|| Error::Singular("interior block is not positive definite".into()))?;
    let x = chol.solve(&b);
    Ok(a - b.transpose() * x)
}

/// Builds a network from a Laplacian-like matrix, clamping tiny negative
/// conductances produced by rounding.
fn rebuild(matrix: &DMatrix<f64>) -> Result<Network> {
    let k = matrix.nrows();
    let scale = (0..k).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max);
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let c = -0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            if c > 0.0 {
                edges.push((i, j, c));
            } else if c < -1e-12 * scale {
                return Err(Error::Singular(format!(
                    "trace produced a negative conductance {c} between {i} and {j}"
                )));
            }
        }
    }
    Network::from_edges(k, edges)
}

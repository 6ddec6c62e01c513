//! Gaussian elimination on weighted graphs.
//!
//! A matrix `M = diag(g + W·1) - W` with `W ≥ 0` symmetric and `g ≥ 0` is
//! stored as a graph: `W` as weighted adjacency and `g` as a per-vertex leak
//! to ground. Eliminating a vertex `z` (star-mesh) updates
//!
//! ```text
//! W_xy += W_xz W_zy / d_z      g_x += W_xz g_z / d_z      d_z = g_z + Σ_y W_zy
//! ```
//!
//! which never subtracts, so pivots stay accurate even when conductances span
//! many orders of magnitude. The same elimination yields an `L D Lᵀ`
//! factorization (when every vertex is eliminated) or a Schur complement onto
//! the surviving vertices.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EliminationGraph {
    adj: Vec<HashMap<usize, f64>>,
    leak: Vec<f64>,
    active: Vec<bool>,
}

/// One eliminated pivot: `d_z` and the neighbour weights `W_xz / d_z` at
/// elimination time.
#[derive(Debug, Clone)]
struct Pivot {
    vertex: usize,
    diag: f64,
    links: Vec<(usize, f64)>,
}

/// `L D Lᵀ` factor produced by eliminating every vertex.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    pivots: Vec<Pivot>,
}

impl EliminationGraph {
    pub fn new(n: usize) -> Self {
        EliminationGraph {
            adj: vec![HashMap::new(); n],
            leak: vec![0.0; n],
            active: vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Adds weight `w` between `x` and `y`, merging with any existing link.
    pub fn add_link(&mut self, x: usize, y: usize, w: f64) {
        debug_assert!(x != y);
        *self.adj[x].entry(y).or_insert(0.0) += w;
        *self.adj[y].entry(x).or_insert(0.0) += w;
    }

    pub fn add_leak(&mut self, x: usize, g: f64) {
        self.leak[x] += g;
    }

    pub fn is_active(&self, x: usize) -> bool {
        self.active[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn leak(&self, x: usize) -> f64 {
        self.leak[x]
    }

    pub fn link(&self, x: usize, y: usize) -> f64 {
        self.adj[x].get(&y).copied().unwrap_or(0.0)
    }

    /// Active neighbours of `x` with weights, sorted by id.
    pub fn links(&self, x: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.adj[x].iter().map(|(&y, &w)| (y, w)).collect();
        v.sort_unstable_by_key(|p| p.0);
        v
    }

    pub fn diag(&self, x: usize) -> f64 {
        self.leak[x] + self.adj[x].values().sum::<f64>()
    }

    /// Eliminates `z`, returning its pivot record.
    fn eliminate(&mut self, z: usize) -> Result<Pivot> {
        let links = self.links(z);
        let d = self.leak[z] + links.iter().map(|p| p.1).sum::<f64>();
        if !(d > 0.0) {
            return Err(Error::Singular(format!("zero pivot at vertex {z}")));
        }
        let g = self.leak[z];
        for (i, &(x, wx)) in links.iter().enumerate() {
            self.adj[x].remove(&z);
            if g > 0.0 {
                self.leak[x] += wx * g / d;
            }
            for &(y, wy) in &links[i + 1..] {
                let w = wx * wy / d;
                *self.adj[x].entry(y).or_insert(0.0) += w;
                *self.adj[y].entry(x).or_insert(0.0) += w;
            }
        }
        self.adj[z].clear();
        self.active[z] = false;
        Ok(Pivot {
            vertex: z,
            diag: d,
            links: links.into_iter().map(|(x, w)| (x, w / d)).collect(),
        })
    }

    /// Eliminates the single vertex `z`.
    pub fn eliminate_vertex(&mut self, z: usize) -> Result<()> {
        if !self.active[z] {
            return Err(Error::InvalidParameter(format!("vertex {z} already eliminated")));
        }
        self.eliminate(z).map(|_| ())
    }

    /// Eliminates every vertex for which `eliminable` holds, choosing the
    /// active vertex of least current degree each time (ties: lowest id).
    /// Gives up with `None` once the factor holds more than `budget` entries.
    fn eliminate_min_degree(&mut self, eliminable: &[bool], budget: usize) -> Result<Option<Vec<Pivot>>> {
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..self.len())
            .filter(|&x| eliminable[x] && self.active[x])
            .map(|x| Reverse((self.degree(x), x)))
            .collect();
        let mut pivots = Vec::with_capacity(heap.len());
        let mut fill = 0;
        while let Some(Reverse((deg, z))) = heap.pop() {
            if !self.active[z] || deg != self.degree(z) {
                continue;
            }
            let pivot = self.eliminate(z)?;
            fill += pivot.links.len();
            if fill > budget {
                return Ok(None);
            }
            for &(x, _) in &pivot.links {
                if eliminable[x] {
                    heap.push(Reverse((self.degree(x), x)));
                }
            }
            pivots.push(pivot);
        }
        Ok(Some(pivots))
    }

    /// Eliminates all vertices not in `keep` (minimum-degree order), leaving
    /// the Schur complement on `keep` in place.
    pub fn reduce_to(&mut self, keep: &[bool]) -> Result<()> {
        let eliminable: Vec<bool> = keep.iter().map(|k| !k).collect();
        self.eliminate_min_degree(&eliminable, usize::MAX).map(|_| ())
    }

    /// Consumes the graph into a full factorization.
    pub fn factor(self) -> Result<LdlFactor> {
        Ok(self.factor_within(usize::MAX)?.expect("unbounded budget"))
    }

    /// Like [`factor`](Self::factor), but returns `None` if the factor would
    /// need more than `budget` off-diagonal entries.
    pub fn factor_within(mut self, budget: usize) -> Result<Option<LdlFactor>> {
        let n = self.len();
        let pivots = self.eliminate_min_degree(&vec![true; n], budget)?;
        Ok(pivots.map(|pivots| LdlFactor { n, pivots }))
    }
}

impl LdlFactor {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for p in &self.pivots {
            let yz = y[p.vertex];
            if yz != 0.0 {
                for &(x, l) in &p.links {
                    y[x] += l * yz;
                }
            }
        }
        for p in &self.pivots {
            y[p.vertex] /= p.diag;
        }
        for p in self.pivots.iter().rev() {
            let s: f64 = p.links.iter().map(|&(x, l)| l * y[x]).sum();
            y[p.vertex] += s;
        }
        y
    }

    /// Total number of stored off-diagonal factor entries.
    pub fn fill(&self) -> usize {
        self.pivots.iter().map(|p| p.links.len()).sum()
    }
}

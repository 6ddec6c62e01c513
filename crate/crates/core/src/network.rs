//! The weighted graph model and its NETX text format.
//!
//! A [`Network`] is a finite, connected, simple graph with symmetric positive
//! conductances. Vertex ids are dense integers `0..n`. Adjacency is kept in
//! compressed rows sorted by neighbour id, and every stored edge has a
//! canonical orientation `u < v` whose position in [`Network::edges`] is the
//! edge index used by [`crate::Current`].

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub conductance: f64,
}

impl Edge {
    /// The endpoint opposite to `x`.
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn resistance(&self) -> f64 {
        1.0 / self.conductance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<Adjacent>,
    degree_weight: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Adjacent {
    vertex: usize,
    conductance: f64,
    edge: usize,
}

impl Network {
    /// Builds a network on `vertex_count` vertices.
    ///
    /// Parallel edges merge by adding conductances. Self-loops, non-positive or
    /// non-finite conductances, out-of-range endpoints and disconnected graphs
    /// are rejected.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut list = Vec::new();
        for (a, b, c) in edges {
            for x in [a, b] {
                if x >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: x,
                        count: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { vertex: a });
            }
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveConductance {
                    u: a,
                    v: b,
                    value: c,
                });
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                conductance: c,
            });
        }
        Self::assemble(vertex_count, list)
    }

    fn assemble(vertex_count: usize, mut list: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyNetwork);
        }
        // stable sort keeps the summation order of parallel edges deterministic
        list.sort_by_key(|a| (a.u, a.v));
        let mut edges: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match edges.last_mut() {
                Some(last) if last.u == e.u && last.v == e.v => last.conductance += e.conductance,
                _ => edges.push(e),
            }
        }

        let mut counts = vec![0usize; vertex_count + 1];
        for e in &edges {
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for i in 0..vertex_count {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let placeholder = Adjacent {
            vertex: 0,
            conductance: 0.0,
            edge: 0,
        };
        let mut adjacency = vec![placeholder; 2 * edges.len()];
        // edges are sorted by (u, v), so each row is filled in increasing neighbour order
        for (idx, e) in edges.iter().enumerate() {
            adjacency[fill[e.u]] = Adjacent {
                vertex: e.v,
                conductance: e.conductance,
                edge: idx,
            };
            fill[e.u] += 1;
        }
        for (idx, e) in edges.iter().enumerate() {
            adjacency[fill[e.v]] = Adjacent {
                vertex: e.u,
                conductance: e.conductance,
                edge: idx,
            };
            fill[e.v] += 1;
        }
        for x in 0..vertex_count {
            adjacency[offsets[x]..offsets[x + 1]].sort_by_key(|a| a.vertex);
        }
        let degree_weight = (0..vertex_count)
            .map(|x| {
                adjacency[offsets[x]..offsets[x + 1]]
                    .iter()
                    .map(|a| a.conductance)
                    .sum()
            })
            .collect();

        let net = Network {
            edges,
            offsets,
            adjacency,
            degree_weight,
            labels: None,
        };
        net.check_connected()?;
        Ok(net)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(unreachable) => Err(Error::Disconnected {
                reachable: 0,
                unreachable,
            }),
            None => Ok(()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.degree_weight.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical order, sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// Neighbours of `x` with their conductances, in increasing id order.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row(x).iter().map(|a| (a.vertex, a.conductance))
    }

    /// Neighbours of `x` as `(neighbour, conductance, edge index)`.
    pub fn incident(&self, x: usize) -> impl Iterator<Item = (usize, f64, usize)> + '_ {
        self.row(x).iter().map(|a| (a.vertex, a.conductance, a.edge))
    }

    fn row(&self, x: usize) -> &[Adjacent] {
        &self.adjacency[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// The cached vertex weight `c(x)`, the sum of incident conductances.
    pub fn degree_weight(&self, x: usize) -> f64 {
        self.degree_weight[x]
    }

    pub fn degree_weights(&self) -> &[f64] {
        &self.degree_weight
    }

    pub fn conductance(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacent(x, y).map(|a| a.conductance)
    }

    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        self.adjacent(x, y).map(|a| a.edge)
    }

    fn adjacent(&self, x: usize, y: usize) -> Option<&Adjacent> {
        let row = self.row(x);
        row.binary_search_by_key(&y, |a| a.vertex)
            .ok()
            .map(|i| &row[i])
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.vertex_count()
    }

    pub(crate) fn check_vertex(&self, x: usize) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: x,
                count: self.vertex_count(),
            })
        }
    }

    /// Largest deviation between the cached `c(x)` and a fresh sum over edges.
    pub fn degree_weight_defect(&self) -> f64 {
        let mut fresh = vec![0.0; self.vertex_count()];
        for e in &self.edges {
            fresh[e.u] += e.conductance;
            fresh[e.v] += e.conductance;
        }
        fresh
            .iter()
            .zip(&self.degree_weight)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest conductance, used to scale tolerances.
    pub fn max_conductance(&self) -> f64 {
        self.edges.iter().map(|e| e.conductance).fold(0.0, f64::max)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.vertex_count()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Full subnetwork induced on `set` (free boundary: no edges leave it).
    pub fn induced(&self, set: &[usize]) -> Result<Subnetwork> {
        let map = self.index_map(set)?;
        let edges = self.edges.iter().filter_map(|e| {
            let (a, b) = (map[e.u], map[e.v]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b, e.conductance))
        });
        let net = Network::from_edges(set.len(), edges)?;
        Ok(Subnetwork {
            net,
            to_parent: set.to_vec(),
            infinity: None,
        })
    }

    /// Subnetwork on `set` with every vertex outside it identified to one new
    /// vertex `∞`, whose conductance to `x` is the total conductance from `x`
    /// to the complement. When no edge leaves `set` the result equals
    /// [`Network::induced`] and carries no `∞` vertex.
    pub fn wired(&self, set: &[usize]) -> Result<Subnetwork> {
        let map = self.index_map(set)?;
        let inf = set.len();
        let mut leaves = false;
        let mut edges = Vec::new();
        for e in &self.edges {
            let (a, b) = (map[e.u], map[e.v]);
            match (a != usize::MAX, b != usize::MAX) {
                (true, true) => edges.push((a, b, e.conductance)),
                (true, false) => {
                    leaves = true;
                    edges.push((a, inf, e.conductance));
                }
                (false, true) => {
                    leaves = true;
                    edges.push((b, inf, e.conductance));
                }
                (false, false) => {}
            }
        }
        let count = if leaves { set.len() + 1 } else { set.len() };
        let net = Network::from_edges(count, edges)?;
        Ok(Subnetwork {
            net,
            to_parent: set.to_vec(),
            infinity: leaves.then_some(inf),
        })
    }

    fn index_map(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut map = vec![usize::MAX; self.vertex_count()];
        for (i, &x) in set.iter().enumerate() {
            self.check_vertex(x)?;
            if map[x] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "vertex {x} listed twice"
                )));
            }
            map[x] = i;
        }
        Ok(map)
    }

    /// Renders the network in NETX format with edges sorted by endpoint.
    pub fn to_netx(&self) -> String {
        let mut out = String::from("netx 1\n");
        for e in &self.edges {
            let _ = writeln!(out, "e {} {} {}", e.u, e.v, e.conductance);
        }
        out
    }
}

/// A subnetwork together with its vertex correspondence to the parent.
#[derive(Debug, Clone)]
pub struct Subnetwork {
    pub net: Network,
    /// `to_parent[i]` is the parent id of subnetwork vertex `i` (excluding `∞`).
    pub to_parent: Vec<usize>,
    /// Index of the collapsed complement vertex, if any.
    pub infinity: Option<usize>,
}

impl Subnetwork {
    pub fn from_parent(&self, parent: usize) -> Option<usize> {
        self.to_parent.iter().position(|&p| p == parent)
    }
}

/// Parses NETX text: optional `#` comment lines, a `netx 1` header, then
/// `e <u> <v> <conductance>` lines.
pub fn parse_network(text: &str) -> Result<Network> {
    let mut header_seen = false;
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        if !header_seen {
            if fields.next() == Some("netx") && fields.next() == Some("1") && fields.next().is_none()
            {
                header_seen = true;
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected header `netx 1`, found `{line}`"),
            });
        }
        let bad = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if fields.next() != Some("e") {
            return Err(bad(format!("expected edge line `e <u> <v> <c>`, found `{line}`")));
        }
        let u: usize = fields
            .next()
            .ok_or_else(|| bad("missing endpoint".into()))?
            .parse()
            .map_err(|e| bad(format!("bad vertex id: {e}")))?;
        let v: usize = fields
            .next()
            .ok_or_else(|| bad("missing endpoint".into()))?
            .parse()
            .map_err(|e| bad(format!("bad vertex id: {e}")))?;
        let c: f64 = fields
            .next()
            .ok_or_else(|| bad("missing conductance".into()))?
            .parse()
            .map_err(|e| bad(format!("bad conductance: {e}")))?;
        if fields.next().is_some() {
            return Err(bad("trailing fields".into()));
        }
        if u == v {
            return Err(Error::SelfLoop { vertex: u });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonPositiveConductance { u, v, value: c });
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        edges.push((u, v, c));
    }
    if !header_seen {
        return Err(Error::Parse {
            line: 0,
            message: "missing `netx 1` header".into(),
        });
    }
    let count = max_id.map_or(0, |m| m + 1);
    Network::from_edges(count, edges)
}

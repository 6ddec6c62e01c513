//! Currents: cycle space, projection onto induced currents, minimal flows
//! and current paths.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::functions::{Current, VertexFunction};
use crate::network::Network;
use crate::operators::{dissipation, divergence, drop};
use crate::solvers::GroundedSystem;

/// Fundamental cycles of a BFS spanning tree rooted at vertex 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    /// Edge indices of the spanning tree.
    pub tree: Vec<usize>,
    /// Non-tree edge index that closes each cycle.
    pub chords: Vec<usize>,
    /// One ±1-valued current per chord, oriented along the chord.
    pub cycles: Vec<Current>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

struct BfsTree {
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

fn bfs_tree(net: &Network, root: usize) -> BfsTree {
    let n = net.vertex_count();
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for (y, _, idx) in net.incident(x) {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                parent[y] = Some((x, idx));
                queue.push_back(y);
            }
        }
    }
    BfsTree { parent, depth }
}

impl BfsTree {
    /// Tree path between `a` and `b`, as a vertex sequence from `a` to `b`.
    fn path(&self, mut a: usize, mut b: usize) -> Vec<usize> {
        let mut left = vec![a];
        let mut right = vec![b];
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a].expect("non-root").0;
                left.push(a);
            } else {
                b = self.parent[b].expect("non-root").0;
                right.push(b);
            }
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left
    }
}

pub fn cycle_basis(net: &Network) -> CycleBasis {
    let t = bfs_tree(net, 0);
    let mut in_tree = vec![false; net.edge_count()];
    let tree: Vec<usize> = t.parent.iter().flatten().map(|&(_, idx)| idx).collect();
    for &idx in &tree {
        in_tree[idx] = true;
    }
    let mut chords = Vec::new();
    let mut cycles = Vec::new();
    for (idx, e) in net.edges().iter().enumerate() {
        if in_tree[idx] {
            continue;
        }
        // chord u → v, then back along the tree from v to u
        let mut walk = t.path(e.v, e.u);
        walk.insert(0, e.u);
        cycles.push(Current::along_path(net, &walk).expect("tree path uses edges"));
        chords.push(idx);
    }
    let mut tree = tree;
    tree.sort_unstable();
    CycleBasis {
        tree,
        chords,
        cycles,
    }
}

/// `max_γ |D(I, χ_γ)|` over the fundamental cycles; zero iff `I` is induced.
pub fn cycle_condition(net: &Network, i: &Current) -> f64 {
    cycle_basis(net)
        .cycles
        .iter()
        .map(|c| dissipation(net, i, c).abs())
        .fold(0.0, f64::max)
}

/// `P∂I = ∂v` with `Δv = div I`, grounded at `o`.
pub fn project_to_induced(net: &Network, i: &Current, o: usize) -> Result<(VertexFunction, Current)> {
    if i.values().len() != net.edge_count() {
        return Err(Error::InvalidParameter("current length does not match the network".into()));
    }
    let div = divergence(net, i);
    let total: f64 = div.values().iter().sum();
    let scale = i.max_abs().max(1.0) * net.edge_count() as f64;
    assert!(total.abs() <= 1e-9 * scale, "divergence must sum to zero");
    let sys = GroundedSystem::new(net, o)?;
    let v = VertexFunction::grounded(sys.solve_grounded(div.values())?, o);
    let p = drop(net, &v);
    Ok((v, p))
}

/// BFS shortest path from `a` to `w`.
pub fn shortest_path(net: &Network, a: usize, w: usize) -> Result<Vec<usize>> {
    net.check_vertex(a)?;
    net.check_vertex(w)?;
    let t = bfs_tree(net, a);
    let mut path = vec![w];
    let mut x = w;
    while let Some((p, _)) = t.parent[x] {
        path.push(p);
        x = p;
    }
    path.reverse();
    Ok(path)
}

/// The unit flow from `a` to `w` of least dissipation: a path flow projected
/// onto the induced currents.
pub fn min_dissipation_flow(net: &Network, a: usize, w: usize, o: usize) -> Result<Current> {
    if a == w {
        return Err(Error::InvalidParameter("flow needs distinct endpoints".into()));
    }
    let chi = Current::along_path(net, &shortest_path(net, a, w)?)?;
    Ok(project_to_induced(net, &chi, o)?.1)
}

/// A path from `a` to `w` along which `v` strictly decreases. Each step takes
/// the largest induced current first, lower vertex ids breaking ties, and
/// backtracks from dead ends.
pub fn find_current_path(net: &Network, v: &VertexFunction, a: usize, w: usize) -> Result<Vec<usize>> {
    net.check_vertex(a)?;
    net.check_vertex(w)?;
    if v.len() != net.vertex_count() {
        return Err(Error::InvalidParameter("function length does not match the network".into()));
    }
    if a == w {
        return Ok(vec![a]);
    }
    if v.get(a) <= v.get(w) {
        return Err(Error::InvalidParameter(format!(
            "v({a}) must exceed v({w}) for a current path"
        )));
    }
    let vals = v.values();
    let downhill = |x: usize| -> Vec<usize> {
        let mut next: Vec<(f64, usize)> = net
            .neighbors(x)
            .filter(|&(y, _)| vals[y] < vals[x])
            .map(|(y, c)| (c * (vals[x] - vals[y]), y))
            .collect();
        next.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
        next.into_iter().map(|(_, y)| y).collect()
    };
    let mut dead = vec![false; net.vertex_count()];
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(a, downhill(a), 0)];
    while let Some((x, options, pos)) = stack.last_mut() {
        if *x == w {
            return Ok(stack.iter().map(|s| s.0).collect());
        }
        match options.get(*pos).copied() {
            Some(y) => {
                *pos += 1;
                if !dead[y] {
                    stack.push((y, downhill(y), 0));
                }
            }
            None => {
                dead[*x] = true;
                stack.pop();
            }
        }
    }
    panic!("no current path from {a} to {w}; v is not a dipole for this pair");
}

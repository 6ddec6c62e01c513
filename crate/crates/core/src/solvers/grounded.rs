use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, CsrMatrix, EliminationGraph, LdlFactor};
use crate::network::Network;

/// Free-vertex count up to which the direct factorization is always used.
pub const DIRECT_LIMIT: usize = 5000;
/// Above [`DIRECT_LIMIT`], `Auto` still factors if the fill stays within this
/// multiple of the matrix's off-diagonal count (trees, ladders, paths).
pub const FILL_FACTOR: usize = 4;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Direct at or below [`DIRECT_LIMIT`] free vertices; above it, direct if
    /// the fill stays within [`FILL_FACTOR`], otherwise CG.
    #[default]
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone)]
enum Backend {
    Direct(LdlFactor),
    Iterative { matrix: CsrMatrix, max_iter: usize },
}

/// The Laplacian restricted to the non-pinned vertices, factored (or prepared
/// for CG) once and reusable for many right-hand sides.
///
/// Solving finds `v` with `Δv(x) = s(x)` at every free vertex and `v(p)`
/// prescribed at every pinned vertex `p`.
#[derive(Debug, Clone)]
pub struct GroundedSystem {
    vertex_count: usize,
    pins: Vec<usize>,
    free: Vec<usize>,
    slot: Vec<usize>,
    pin_links: Vec<(usize, usize, f64)>,
    backend: Backend,
    tolerance: f64,
}

const NONE: usize = usize::MAX;

impl GroundedSystem {
    /// Grounds the network at the single vertex `o`.
    pub fn new(net: &Network, o: usize) -> Result<Self> {
        Self::with_pins(net, &[o], SolverKind::Auto, DEFAULT_TOLERANCE)
    }

    pub fn with_pins(net: &Network, pins: &[usize], kind: SolverKind, tolerance: f64) -> Result<Self> {
        if pins.is_empty() {
            return Err(Error::InvalidParameter("at least one pinned vertex is required".into()));
        }
        let n = net.vertex_count();
        let mut pin_slot = vec![NONE; n];
        for (i, &p) in pins.iter().enumerate() {
            net.check_vertex(p)?;
            if pin_slot[p] != NONE {
                return Err(Error::InvalidParameter(format!("vertex {p} pinned twice")));
            }
            pin_slot[p] = i;
        }
        let free: Vec<usize> = (0..n).filter(|&x| pin_slot[x] == NONE).collect();
        let mut slot = vec![NONE; n];
        for (i, &x) in free.iter().enumerate() {
            slot[x] = i;
        }
        let mut pin_links = Vec::new();
        for e in net.edges() {
            match (slot[e.u], slot[e.v]) {
                (a, NONE) if a != NONE => pin_links.push((a, pin_slot[e.v], e.conductance)),
                (NONE, b) if b != NONE => pin_links.push((b, pin_slot[e.u], e.conductance)),
                _ => {}
            }
        }
        let budget = match kind {
            SolverKind::Auto if free.len() <= DIRECT_LIMIT => Some(usize::MAX),
            SolverKind::Auto => Some(FILL_FACTOR * (net.edge_count() + free.len())),
            SolverKind::Direct => Some(usize::MAX),
            SolverKind::Iterative => None,
        };
        let factor = match budget {
            Some(budget) => {
                let mut g = EliminationGraph::new(free.len());
                for e in net.edges() {
                    match (slot[e.u], slot[e.v]) {
                        (NONE, NONE) => {}
                        (a, NONE) => g.add_leak(a, e.conductance),
                        (NONE, b) => g.add_leak(b, e.conductance),
                        (a, b) => g.add_link(a, b, e.conductance),
                    }
                }
                g.factor_within(budget)?
            }
            None => None,
        };
        let backend = match factor {
            Some(f) => Backend::Direct(f),
            None => {
                let rows = free.iter().map(|&x| {
                    let mut row: Vec<(usize, f64)> = net
                        .neighbors(x)
                        .filter(|&(y, _)| slot[y] != NONE)
                        .map(|(y, c)| (slot[y], -c))
                        .collect();
                    row.push((slot[x], net.degree_weight(x)));
                    row
                });
                Backend::Iterative {
                    matrix: CsrMatrix::from_rows(free.len(), rows),
                    max_iter: 20 * free.len().max(1),
                }
            }
        };
        Ok(GroundedSystem {
            vertex_count: n,
            pins: pins.to_vec(),
            free,
            slot,
            pin_links,
            backend,
            tolerance,
        })
    }

    pub fn pins(&self) -> &[usize] {
        &self.pins
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves with per-vertex source `s` (entries at pinned vertices are
    /// ignored) and `pin_values[i]` at `pins[i]`.
    pub fn solve(&self, source: &[f64], pin_values: &[f64]) -> Result<Vec<f64>> {
        if source.len() != self.vertex_count || pin_values.len() != self.pins.len() {
            return Err(Error::InvalidParameter("right-hand side has the wrong length".into()));
        }
        let mut b: Vec<f64> = self.free.iter().map(|&x| source[x]).collect();
        for &(i, p, c) in &self.pin_links {
            b[i] += c * pin_values[p];
        }
        let x = match &self.backend {
            Backend::Direct(f) => f.solve(&b),
            Backend::Iterative { matrix, max_iter } => {
                conjugate_gradient(matrix, &b, self.tolerance, *max_iter)?.x
            }
        };
        let mut out = vec![0.0; self.vertex_count];
        for (&p, &val) in self.pins.iter().zip(pin_values) {
            out[p] = val;
        }
        for (&v, &xi) in self.free.iter().zip(&x) {
            out[v] = xi;
        }
        Ok(out)
    }

    /// Solves `Δv = s` with all pins held at 0.
    pub fn solve_grounded(&self, source: &[f64]) -> Result<Vec<f64>> {
        self.solve(source, &vec![0.0; self.pins.len()])
    }

    pub fn is_free(&self, x: usize) -> bool {
        self.slot[x] != NONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    #[test]
    fn direct_and_iterative_agree() {
        let net = generate(&GeneratorSpec::LatticeBox { dim: 2, side: 9 }).unwrap().net;
        let mut s = vec![0.0; net.vertex_count()];
        s[3] = 1.0;
        s[70] = -0.5;
        let d = GroundedSystem::with_pins(&net, &[40], SolverKind::Direct, 1e-12).unwrap();
        let i = GroundedSystem::with_pins(&net, &[40], SolverKind::Iterative, 1e-12).unwrap();
        let a = d.solve_grounded(&s).unwrap();
        let b = i.solve_grounded(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn two_pin_dirichlet() {
        let net = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let sys = GroundedSystem::with_pins(&net, &[0, 2], SolverKind::Auto, 1e-12).unwrap();
        let v = sys.solve(&[0.0; 3], &[1.0, 0.0]).unwrap();
        assert_eq!(v, vec![1.0, 0.5, 0.0]);
    }
}

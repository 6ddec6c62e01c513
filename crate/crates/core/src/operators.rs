//! Laplacian, energy and dissipation forms, drop and divergence, normal
//! derivatives, transition probabilities and the energy-kernel Gram matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exhaustion::{boundary_of, membership, ExhaustionPlan};
use crate::functions::{Current, VertexFunction};
use crate::network::Network;
use crate::solvers::GroundedSystem;

/// `(Δv)(x) = Σ_{y~x} c_xy (v(x) − v(y))`.
pub fn apply_laplacian(net: &Network, v: &VertexFunction) -> VertexFunction {
    let vals = v.values();
    VertexFunction::raw(
        (0..net.vertex_count())
            .map(|x| net.neighbors(x).map(|(y, c)| c * (vals[x] - vals[y])).sum())
            .collect(),
    )
}

/// `E(u, v) = ½ Σ_{x,y} c_xy (u(x) − u(y)) (v(x) − v(y))`, summed once per edge.
pub fn energy(net: &Network, u: &VertexFunction, v: &VertexFunction) -> f64 {
    let (u, v) = (u.values(), v.values());
    net.edges()
        .iter()
        .map(|e| e.conductance * (u[e.u] - u[e.v]) * (v[e.u] - v[e.v]))
        .sum()
}

/// `D(I, J) = Σ_e I(e) J(e) / c_e` over unoriented edges.
pub fn dissipation(net: &Network, i: &Current, j: &Current) -> f64 {
    net.edges()
        .iter()
        .zip(i.values().iter().zip(j.values()))
        .map(|(e, (a, b))| a * b / e.conductance)
        .sum()
}

/// Ohm's law: `(∂v)(x, y) = c_xy (v(x) − v(y))`.
pub fn drop(net: &Network, v: &VertexFunction) -> Current {
    let v = v.values();
    Current::from_values(
        net.edges()
            .iter()
            .map(|e| e.conductance * (v[e.u] - v[e.v]))
            .collect(),
    )
}

/// `(div I)(x) = Σ_{y~x} I(x, y)`.
pub fn divergence(net: &Network, i: &Current) -> VertexFunction {
    let mut out = vec![0.0; net.vertex_count()];
    for x in 0..net.vertex_count() {
        out[x] = net
            .incident(x)
            .map(|(y, _, idx)| i.oriented(idx, x < y))
            .sum();
    }
    VertexFunction::raw(out)
}

/// `∂v/∂n(x) = Σ_{y∈H} c_xy (v(x) − v(y))` for `x` on the boundary of `H`.
pub fn normal_derivative(net: &Network, set: &[usize], v: &VertexFunction, x: usize) -> Result<f64> {
    let inside = membership(net, set)?;
    net.check_vertex(x)?;
    let on_boundary = inside[x] && net.neighbors(x).any(|(y, _)| !inside[y]);
    if !on_boundary {
        return Err(Error::NotOnBoundary { vertex: x });
    }
    Ok(inward_flux(net, &inside, v.values(), x))
}

fn inward_flux(net: &Network, inside: &[bool], v: &[f64], x: usize) -> f64 {
    net.neighbors(x)
        .filter(|&(y, _)| inside[y])
        .map(|(y, c)| c * (v[x] - v[y]))
        .sum()
}

/// `p(x, y) = c_xy / c(x)`, zero for non-neighbours.
pub fn transition_prob(net: &Network, x: usize, y: usize) -> f64 {
    net.conductance(x, y)
        .map_or(0.0, |c| c / net.degree_weight(x))
}

/// Both sides of the Gauss-Green identity on a vertex set `H`:
/// `E_H(u, v) = Σ_{int H} u Δv + Σ_{bd H} u ∂v/∂n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussGreen {
    pub energy: f64,
    pub interior: f64,
    pub boundary: f64,
}

impl GaussGreen {
    pub fn defect(&self) -> f64 {
        (self.energy - self.interior - self.boundary).abs()
    }
}

pub fn gauss_green(net: &Network, set: &[usize], u: &VertexFunction, v: &VertexFunction) -> Result<GaussGreen> {
    let inside = membership(net, set)?;
    let (uu, vv) = (u.values(), v.values());
    let energy = net
        .edges()
        .iter()
        .filter(|e| inside[e.u] && inside[e.v])
        .map(|e| e.conductance * (uu[e.u] - uu[e.v]) * (vv[e.u] - vv[e.v]))
        .sum();
    let mut interior = 0.0;
    let mut boundary = 0.0;
    for x in (0..net.vertex_count()).filter(|&x| inside[x]) {
        let flux = inward_flux(net, &inside, vv, x);
        if net.neighbors(x).all(|(y, _)| inside[y]) {
            interior += uu[x] * flux;
        } else {
            boundary += uu[x] * flux;
        }
    }
    Ok(GaussGreen {
        energy,
        interior,
        boundary,
    })
}

/// `Σ_{int H} Δu + Σ_{bd H} ∂u/∂n`, evaluated in exact rational arithmetic
/// on the binary values of `u` and the conductances.
pub fn flux_balance_exact(net: &Network, set: &[usize], u: &VertexFunction) -> Result<BigRational> {
    let inside = membership(net, set)?;
    let q = |x: f64| BigRational::from_float(x).expect("finite values");
    let uq: Vec<Option<BigRational>> = u
        .values()
        .iter()
        .zip(&inside)
        .map(|(&x, &i)| i.then(|| q(x)))
        .collect();
    let mut total = BigRational::zero();
    for x in (0..net.vertex_count()).filter(|&x| inside[x]) {
        let ux = uq[x].as_ref().expect("inside");
        for (y, c) in net.neighbors(x).filter(|&(y, _)| inside[y]) {
            let uy = uq[y].as_ref().expect("inside");
            total += q(c) * (ux - uy);
        }
    }
    Ok(total)
}

/// `Σ_{bd G_k} u ∂v/∂n` for `k = 1..=last`; the limit is not asserted.
pub fn boundary_term_sequence(
    net: &Network,
    plan: &ExhaustionPlan,
    u: &VertexFunction,
    v: &VertexFunction,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    (1..=plan.last_level(k_max))
        .map(|k| {
            let set = plan.level(net, k)?;
            let inside = membership(net, &set)?;
            let bd = boundary_of(net, &set)?;
            let term = bd
                .iter()
                .map(|&x| u.get(x) * inward_flux(net, &inside, v.values(), x))
                .sum();
            Ok((k, term))
        })
        .collect()
}

/// `M_F(x, y) = ⟨v_x, v_y⟩_E = v_x(y)` for energy kernels grounded at `o`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub index: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl GramMatrix {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.matrix;
        (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.matrix.clone().cholesky().is_some() && self.lambda_min > 0.0
    }
}

pub fn energy_kernel_gram(net: &Network, o: usize, set: &[usize]) -> Result<GramMatrix> {
    net.check_vertex(o)?;
    if set.contains(&o) {
        return Err(Error::InvalidParameter("index set must exclude the origin".into()));
    }
    let n = net.vertex_count();
    let sys = GroundedSystem::new(net, o)?;
    let f = set.len();
    let mut m = DMatrix::zeros(f, f);
    for (j, &x) in set.iter().enumerate() {
        net.check_vertex(x)?;
        let mut s = vec![0.0; n];
        s[x] = 1.0;
        let vx = sys.solve_grounded(&s)?;
        for (i, &y) in set.iter().enumerate() {
            m[(i, j)] = vx[y];
        }
    }
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GramMatrix {
        index: set.to_vec(),
        matrix: m,
        lambda_min,
        lambda_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    fn cycle(n: usize) -> Network {
        generate(&GeneratorSpec::Cycle { n }).unwrap().net
    }

    #[test]
    fn laplacian_stencils() {
        let edge = Network::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let l = apply_laplacian(&edge, &VertexFunction::raw(vec![0.0, 1.0]));
        assert_eq!(l.values(), &[-1.0, 1.0]);
        let l = apply_laplacian(&cycle(4), &VertexFunction::dirac(4, 0));
        assert_eq!(l.values(), &[2.0, -1.0, 0.0, -1.0]);
        let l = apply_laplacian(&cycle(4), &VertexFunction::constant(4, 3.5));
        assert_eq!(l.max_abs(), 0.0);
    }

    #[test]
    fn dirac_energies() {
        let net = generate(&GeneratorSpec::SquareExample { rho: [1.0, 0.5, 2.0, 4.0] }).unwrap().net;
        for x in 0..4 {
            let dx = VertexFunction::dirac(4, x);
            assert_eq!(energy(&net, &dx, &dx), net.degree_weight(x));
            for (y, c) in net.neighbors(x) {
                assert_eq!(energy(&net, &dx, &VertexFunction::dirac(4, y)), -c);
            }
        }
    }

    #[test]
    fn dissipation_examples() {
        let net = Network::from_edges(2, [(0, 1, 2.0)]).unwrap();
        let i = Current::from_values(vec![1.0]);
        assert_eq!(dissipation(&net, &i, &i), 0.5);
        let z = Current::zeros(&net);
        assert_eq!(dissipation(&net, &z, &z), 0.0);
        // edge Diracs at a vertex of a unit lattice box
        let g = generate(&GeneratorSpec::LatticeBox { dim: 2, side: 5 }).unwrap();
        let o = g.origin();
        let mut eta = Current::zeros(&g.net);
        for (y, _) in g.net.neighbors(o) {
            eta.push(&g.net, o, y, 1.0).unwrap();
        }
        assert_eq!(dissipation(&g.net, &eta, &eta), 4.0);
    }

    #[test]
    fn drop_and_divergence() {
        let net = cycle(3);
        let i = drop(&net, &VertexFunction::raw(vec![1.0, 0.0, 0.0]));
        assert_eq!(i.get(&net, 0, 1).unwrap(), 1.0);
        assert_eq!(i.get(&net, 0, 2).unwrap(), 1.0);
        assert_eq!(i.get(&net, 1, 2).unwrap(), 0.0);

        let path = generate(&GeneratorSpec::Path { n: 3 }).unwrap().net;
        let chi = Current::along_path(&path, &[0, 1, 2]).unwrap();
        assert_eq!(divergence(&path, &chi).values(), &[1.0, 0.0, -1.0]);
        let loop_ = Current::along_path(&cycle(4), &[0, 1, 2, 3, 0]).unwrap();
        assert_eq!(divergence(&cycle(4), &loop_).max_abs(), 0.0);
    }

    #[test]
    fn normal_derivative_examples() {
        let path = generate(&GeneratorSpec::Path { n: 3 }).unwrap().net;
        let v = VertexFunction::raw(vec![0.0, 1.0, 2.0]);
        assert_eq!(normal_derivative(&path, &[0, 1], &v, 1).unwrap(), 1.0);
        assert!(matches!(
            normal_derivative(&path, &[0, 1, 2], &v, 1),
            Err(Error::NotOnBoundary { vertex: 1 })
        ));
    }

    #[test]
    fn transition_examples() {
        let g = generate(&GeneratorSpec::GeometricIntegers { c: 2.0, span: 6, half: true }).unwrap();
        assert!((transition_prob(&g.net, 3, 4) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(transition_prob(&cycle(4), 0, 1), 0.5);
        assert_eq!(transition_prob(&cycle(4), 0, 2), 0.0);
    }

    #[test]
    fn gram_examples() {
        let edge = Network::from_edges(2, [(0, 1, 4.0)]).unwrap();
        let g = energy_kernel_gram(&edge, 0, &[1]).unwrap();
        assert!((g.matrix[(0, 0)] - 0.25).abs() < 1e-15);

        let path = generate(&GeneratorSpec::Path { n: 3 }).unwrap().net;
        let g = energy_kernel_gram(&path, 0, &[1, 2]).unwrap();
        let expect = [[1.0, 1.0], [1.0, 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.matrix[(i, j)] - expect[i][j]).abs() < 1e-14);
            }
        }
        assert!(g.is_positive_definite());
        assert!(energy_kernel_gram(&path, 0, &[0, 1]).is_err());
    }
}

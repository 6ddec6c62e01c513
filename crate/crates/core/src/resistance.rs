//! Effective resistance: finite formulations, free and wired exhaustion
//! limits, trace resistance, harmonic and boundary resistance, and metric
//! property checks.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaustion::ExhaustionPlan;
use crate::flows::min_dissipation_flow;
use crate::functions::VertexFunction;
use crate::network::Network;
use crate::operators::{dissipation, energy};
use crate::reduce::schur_trace;
use crate::solvers::{dipole_with, GroundedSystem, SolverKind, DEFAULT_TOLERANCE};

/// The six equivalent characterizations of `R(x, y)` on a finite network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SixFormulations {
    /// `v(x) − v(y)` for `Δv = δ_x − δ_y`.
    pub potential_drop: f64,
    /// `E(v)` for the same dipole.
    pub dipole_energy: f64,
    /// `D(I)` for the minimal-dissipation unit flow.
    pub min_dissipation: f64,
    /// `1 / min{E(u) : u(x) = 1, u(y) = 0}`.
    pub inverse_capacity: f64,
    /// Optimal-κ form; on finite networks equal to `inverse_capacity`.
    pub kappa: f64,
    /// Supremum form; on finite networks equal to `inverse_capacity`.
    pub supremum: f64,
    /// `kappa` and `supremum` are taken from the two-pin solve, not re-optimized.
    pub derived_equal: bool,
}

impl SixFormulations {
    pub fn values(&self) -> [f64; 6] {
        [
            self.potential_drop,
            self.dipole_energy,
            self.min_dissipation,
            self.inverse_capacity,
            self.kappa,
            self.supremum,
        ]
    }

    /// Largest pairwise relative disagreement.
    pub fn spread(&self) -> f64 {
        let v = self.values();
        let mut worst: f64 = 0.0;
        for a in &v {
            for b in &v {
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteResistance {
    pub value: f64,
    pub six: SixFormulations,
}

/// `R(x, y)` on a finite network, with all six formulations evaluated.
pub fn resistance_finite(net: &Network, x: usize, y: usize) -> Result<FiniteResistance> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        let six = SixFormulations {
            potential_drop: 0.0,
            dipole_energy: 0.0,
            min_dissipation: 0.0,
            inverse_capacity: 0.0,
            kappa: 0.0,
            supremum: 0.0,
            derived_equal: true,
        };
        return Ok(FiniteResistance { value: 0.0, six });
    }
    let n = net.vertex_count();
    let sys = GroundedSystem::new(net, y)?;
    let v = dipole_with(&sys, n, x, y, y)?;
    let drop = v.get(x) - v.get(y);
    let e = energy(net, &v, &v);
    let flow = min_dissipation_flow(net, x, y, y)?;
    let d = dissipation(net, &flow, &flow);
    let two_pin = GroundedSystem::with_pins(net, &[x, y], SolverKind::Auto, DEFAULT_TOLERANCE)?;
    let u = VertexFunction::raw(two_pin.solve(&vec![0.0; n], &[1.0, 0.0])?);
    let cap = 1.0 / energy(net, &u, &u);
    Ok(FiniteResistance {
        value: drop,
        six: SixFormulations {
            potential_drop: drop,
            dipole_energy: e,
            min_dissipation: d,
            inverse_capacity: cap,
            kappa: cap,
            supremum: cap,
            derived_equal: true,
        },
    })
}

/// `R(x, y)` by a single dipole solve.
pub fn resistance(net: &Network, x: usize, y: usize) -> Result<f64> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    if x == y {
        return Ok(0.0);
    }
    let sys = GroundedSystem::new(net, y)?;
    let v = dipole_with(&sys, net.vertex_count(), x, y, y)?;
    Ok(v.get(x))
}

/// All-pairs resistance matrix from the energy kernels grounded at vertex 0.
pub fn resistance_matrix(net: &Network) -> Result<DMatrix<f64>> {
    let n = net.vertex_count();
    let sys = GroundedSystem::new(net, 0)?;
    let mut kernel = DMatrix::zeros(n, n);
    for x in 1..n {
        let mut s = vec![0.0; n];
        s[x] = 1.0;
        let vx = sys.solve_grounded(&s)?;
        for (y, val) in vx.into_iter().enumerate() {
            kernel[(y, x)] = val;
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            kernel[(i, i)] + kernel[(j, j)] - kernel[(i, j)] - kernel[(j, i)]
        }
    }))
}

/// `R^tr(x, y)` from the Schur complement onto `{x, y}`.
pub fn trace_resistance(net: &Network, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    let t = schur_trace(net, &[x, y])?;
    let c = t.conductance(x, y).expect("both kept");
    if !(c > 0.0) {
        return Err(Error::Singular("trace conductance is not positive".into()));
    }
    Ok(1.0 / c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExhaustionOptions {
    /// Stop once successive levels differ by less than this.
    pub tol: f64,
    pub k_max: usize,
}

impl Default for ExhaustionOptions {
    fn default() -> Self {
        ExhaustionOptions {
            tol: 1e-8,
            k_max: 30,
        }
    }
}

/// A limit over exhaustion levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Boundary {
    Free,
    Wired,
}

/// `R^F(x, y)`: resistance on the induced subnetworks `G_k`. Levels that do
/// not yet contain both vertices are skipped.
pub fn free_resistance(
    net: &Network,
    x: usize,
    y: usize,
    plan: &ExhaustionPlan,
    opts: ExhaustionOptions,
) -> Result<LimitEstimate> {
    exhaust(net, x, y, plan, opts, Boundary::Free)
}

/// `R^W(x, y)`: resistance on `G_k^W`, the complement collapsed to one vertex.
pub fn wired_resistance(
    net: &Network,
    x: usize,
    y: usize,
    plan: &ExhaustionPlan,
    opts: ExhaustionOptions,
) -> Result<LimitEstimate> {
    exhaust(net, x, y, plan, opts, Boundary::Wired)
}

fn exhaust(
    net: &Network,
    x: usize,
    y: usize,
    plan: &ExhaustionPlan,
    opts: ExhaustionOptions,
    boundary: Boundary,
) -> Result<LimitEstimate> {
    net.check_vertex(x)?;
    net.check_vertex(y)?;
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut converged = false;
    if x == y {
        return Ok(LimitEstimate {
            value: 0.0,
            trace,
            converged: true,
        });
    }
    for k in 1..=plan.last_level(opts.k_max) {
        let set = plan.level(net, k)?;
        let (Ok(i), Ok(j)) = (set.binary_search(&x), set.binary_search(&y)) else {
            continue;
        };
        let saturated = set.len() == net.vertex_count();
        let sub = match boundary {
            Boundary::Free => net.induced(&set)?,
            Boundary::Wired => net.wired(&set)?,
        };
        let r = resistance(&sub.net, i, j)?;
        let settled = trace
            .last()
            .is_some_and(|&(_, prev)| (r - prev).abs() < opts.tol);
        trace.push((k, r));
        if saturated || settled {
            converged = true;
            break;
        }
    }
    let value = trace.last().map(|t| t.1).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "vertices {x} and {y} never share an exhaustion level up to k = {}",
            plan.last_level(opts.k_max)
        ))
    })?;
    Ok(LimitEstimate {
        value,
        trace,
        converged,
    })
}

/// Per-pair record of every resistance variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceReport {
    pub pair: (usize, usize),
    pub finite: Option<f64>,
    pub free: f64,
    pub wired: f64,
    pub trace: Option<f64>,
    pub harmonic: f64,
    /// `None` when the harmonic resistance vanishes (boundary resistance is infinite).
    pub boundary: Option<f64>,
    pub boundary_infinite: bool,
    pub traces: BTreeMap<String, Vec<(usize, f64)>>,
    pub converged: BTreeMap<String, bool>,
    pub tolerances: ExhaustionOptions,
}

/// Assembles all variants. `finite` and `trace` are filled in only for
/// genuinely finite networks (plans without a truncation limit).
pub fn resistance_report(
    net: &Network,
    x: usize,
    y: usize,
    plan: &ExhaustionPlan,
    opts: ExhaustionOptions,
) -> Result<ResistanceReport> {
    let free = free_resistance(net, x, y, plan, opts)?;
    let wired = wired_resistance(net, x, y, plan, opts)?;
    let (finite, trace) = if plan.max_level.is_none() {
        (
            Some(resistance_finite(net, x, y)?.value),
            Some(trace_resistance(net, x, y)?),
        )
    } else {
        (None, None)
    };
    let harmonic = free.value - wired.value;
    let threshold = opts.tol.max(1e-12 * free.value.abs());
    let boundary_infinite = harmonic <= threshold;
    let boundary = (!boundary_infinite).then(|| wired.value * free.value / harmonic);
    let mut traces = BTreeMap::new();
    traces.insert("free".to_string(), free.trace.clone());
    traces.insert("wired".to_string(), wired.trace.clone());
    let mut converged = BTreeMap::new();
    converged.insert("free".to_string(), free.converged);
    converged.insert("wired".to_string(), wired.converged);
    Ok(ResistanceReport {
        pair: (x, y),
        finite,
        free: free.value,
        wired: wired.value,
        trace,
        harmonic,
        boundary,
        boundary_infinite,
        traces,
        converged,
        tolerances: opts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub checked: usize,
    /// Triples `(x, y, z)` with `R(x,z) − R(x,y) − R(y,z) > 1e-9`, and the excess.
    pub triangle_violations: Vec<(usize, usize, usize, f64)>,
    pub symmetric: bool,
    pub positive: bool,
}

impl MetricReport {
    pub fn ok(&self) -> bool {
        self.triangle_violations.is_empty() && self.symmetric && self.positive
    }
}

/// Checks the triangle inequality on `triples`, plus symmetry and positivity.
pub fn check_metric(net: &Network, triples: &[(usize, usize, usize)]) -> Result<MetricReport> {
    let r = resistance_matrix(net)?;
    let n = net.vertex_count();
    let mut violations = Vec::new();
    for &(x, y, z) in triples {
        for v in [x, y, z] {
            net.check_vertex(v)?;
        }
        let excess = r[(x, z)] - r[(x, y)] - r[(y, z)];
        if excess > 1e-9 {
            violations.push((x, y, z, excess));
        }
    }
    let scale = r.amax().max(1.0);
    let symmetric = (0..n).all(|i| (0..i).all(|j| (r[(i, j)] - r[(j, i)]).abs() <= 1e-9 * scale));
    let positive = (0..n).all(|i| (0..n).all(|j| i == j || r[(i, j)] > 0.0));
    Ok(MetricReport {
        checked: triples.len(),
        triangle_violations: violations,
        symmetric,
        positive,
    })
}

/// All ordered triples on `n` vertices.
pub fn all_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                out.push((x, y, z));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemidefiniteReport {
    pub trials: usize,
    /// Largest value of `Σ f(x) R(x,y) f(y)` over the trials.
    pub max_form: f64,
    pub scale: f64,
    pub violations: usize,
}

impl SemidefiniteReport {
    pub fn ok(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `f` on `set` with `Σ f = 0` and evaluates `fᵀ R f`, which should
/// be nonpositive.
pub fn check_negative_semidefinite(
    net: &Network,
    set: &[usize],
    trials: usize,
    seed: u64,
) -> Result<SemidefiniteReport> {
    let r = resistance_matrix(net)?;
    for &x in set {
        net.check_vertex(x)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_form = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut scale: f64 = 0.0;
    for _ in 0..trials {
        let mut f: Vec<f64> = set.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = f.iter().sum::<f64>() / f.len().max(1) as f64;
        f.iter_mut().for_each(|v| *v -= mean);
        let form = quadratic_form(&r, set, &f);
        let s = r.amax() * f.iter().map(|v| v * v).sum::<f64>();
        scale = scale.max(s);
        max_form = max_form.max(form);
        if form > 1e-9 * s.max(1.0) {
            violations += 1;
        }
    }
    Ok(SemidefiniteReport {
        trials,
        max_form: if trials == 0 { 0.0 } else { max_form },
        scale,
        violations,
    })
}

/// `Σ_{x,y ∈ set} f(x) R(x,y) f(y)`.
pub fn quadratic_form(r: &DMatrix<f64>, set: &[usize], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            total += f[i] * r[(x, y)] * f[j];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};

    fn gen(spec: GeneratorSpec) -> crate::Generated {
        generate(&spec).unwrap()
    }

    #[test]
    fn finite_examples() {
        let cyc = gen(GeneratorSpec::Cycle { n: 5 }).net;
        let r = resistance_finite(&cyc, 0, 2).unwrap();
        assert!((r.value - 1.2).abs() < 1e-14);
        assert!(r.six.spread() < 1e-12);
        let path = gen(GeneratorSpec::Path { n: 3 }).net;
        assert!((resistance_finite(&path, 0, 2).unwrap().value - 2.0).abs() < 1e-14);
        let del = gen(GeneratorSpec::DeletionExample { deleted: false }).net;
        assert!((resistance_finite(&del, 0, 4).unwrap().value - 10.0 / 11.0).abs() < 1e-14);
        assert_eq!(resistance_finite(&del, 2, 2).unwrap().value, 0.0);
    }

    #[test]
    fn trace_examples() {
        let path = gen(GeneratorSpec::Path { n: 3 }).net;
        assert!((trace_resistance(&path, 0, 2).unwrap() - 2.0).abs() < 1e-14);
        let del = gen(GeneratorSpec::DeletionExample { deleted: false }).net;
        assert!((trace_resistance(&del, 0, 4).unwrap() - 10.0 / 11.0).abs() < 1e-14);
        let edge = Network::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(trace_resistance(&edge, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn finite_network_free_equals_wired() {
        let g = gen(GeneratorSpec::Cycle { n: 7 });
        let rep = resistance_report(&g.net, 0, 3, &g.plan, ExhaustionOptions::default()).unwrap();
        assert_eq!(rep.free, rep.wired);
        assert!(rep.boundary_infinite);
        assert_eq!(rep.boundary, None);
        assert!((rep.finite.unwrap() - 12.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn tree_free_resistance_is_geodesic() {
        let g = gen(GeneratorSpec::BinaryTree { depth: 8 });
        let f = free_resistance(&g.net, 0, 1, &g.plan, ExhaustionOptions::default()).unwrap();
        assert!(f.converged);
        assert!((f.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_free_resistance() {
        let g = gen(GeneratorSpec::Path { n: 41 });
        let f = free_resistance(&g.net, 20, 23, &g.plan, ExhaustionOptions::default()).unwrap();
        assert!((f.value - 3.0).abs() < 1e-12);
        assert_eq!(f.trace.first().unwrap().0, 3);
    }

    #[test]
    fn semidefinite_examples() {
        let cyc = gen(GeneratorSpec::Cycle { n: 8 }).net;
        let rep = check_negative_semidefinite(&cyc, &[0, 2, 3, 7], 100, 1).unwrap();
        assert!(rep.ok());
        let r = resistance_matrix(&cyc).unwrap();
        let two = quadratic_form(&r, &[0, 3], &[1.0, -1.0]);
        assert!((two + 2.0 * r[(0, 3)]).abs() < 1e-14);
        assert_eq!(quadratic_form(&r, &[0, 3], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn metric_on_small_net() {
        let net = gen(GeneratorSpec::LatticeBox { dim: 2, side: 3 }).net;
        let rep = check_metric(&net, &all_triples(net.vertex_count())).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.checked, 729);
    }
}

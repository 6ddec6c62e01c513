//! Dipoles, monopoles, Royden approximants and the explicit recursions.

mod defect;
mod grounded;
mod ladder;

pub use defect::{defect_sequence, DefectSequence, DefectVariant};
pub use grounded::{GroundedSystem, SolverKind, DEFAULT_TOLERANCE, DIRECT_LIMIT, FILL_FACTOR};
pub use ladder::{ladder_harmonic, LadderHarmonic};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::ExhaustionPlan;
use crate::functions::VertexFunction;
use crate::network::Network;
use crate::operators::{apply_laplacian, energy};

/// Source vector `δ_a − δ_w`.
pub(crate) fn dipole_source(n: usize, a: usize, w: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    s[a] += 1.0;
    s[w] -= 1.0;
    s
}

/// Solves `Δv = δ_a − δ_w`, grounded at `o`.
pub fn solve_dipole(net: &Network, a: usize, w: usize, o: usize) -> Result<VertexFunction> {
    net.check_vertex(a)?;
    net.check_vertex(w)?;
    if a == w {
        return Err(Error::InvalidParameter("dipole needs distinct endpoints".into()));
    }
    let sys = GroundedSystem::new(net, o)?;
    dipole_with(&sys, net.vertex_count(), a, w, o)
}

/// Dipole from a prepared system grounded at `o` alone.
pub fn dipole_with(sys: &GroundedSystem, n: usize, a: usize, w: usize, o: usize) -> Result<VertexFunction> {
    let v = sys.solve_grounded(&dipole_source(n, a, w))?;
    Ok(VertexFunction::grounded(v, o))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonopoleSign {
    /// `Δw = +δ_o`.
    #[default]
    Positive,
    /// `Δw = −δ_o`.
    Negative,
}

/// A monopole on the wired level `G_k^W`, restricted to `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WiredMonopole {
    pub level: usize,
    /// Parent ids of `G_k`, sorted.
    pub vertices: Vec<usize>,
    /// `w` at each entry of `vertices`; `w(∞) = 0`.
    pub values: Vec<f64>,
    pub energy: f64,
}

impl WiredMonopole {
    pub fn value_at(&self, parent: usize) -> Option<f64> {
        self.vertices
            .binary_search(&parent)
            .ok()
            .map(|i| self.values[i])
    }
}

/// Solves `Δw = ±δ_o` on `G_k^W` with `w(∞) = 0`.
pub fn solve_monopole_wired(
    net: &Network,
    o: usize,
    plan: &ExhaustionPlan,
    k: usize,
    sign: MonopoleSign,
) -> Result<WiredMonopole> {
    let set = plan.level(net, k)?;
    let sub = net.wired(&set)?;
    let inf = sub.infinity.ok_or_else(|| {
        Error::Unsupported(format!(
            "level {k} covers the whole network; a monopole needs a wired complement"
        ))
    })?;
    let local = set
        .binary_search(&o)
        .map_err(|_| Error::InvalidParameter(format!("vertex {o} is not in G_{k}")))?;
    let sys = GroundedSystem::with_pins(&sub.net, &[inf], SolverKind::Auto, DEFAULT_TOLERANCE)?;
    let mut source = vec![0.0; sub.net.vertex_count()];
    source[local] = match sign {
        MonopoleSign::Positive => 1.0,
        MonopoleSign::Negative => -1.0,
    };
    let w = sys.solve_grounded(&source)?;
    let energy = sub
        .net
        .edges()
        .iter()
        .map(|e| e.conductance * (w[e.u] - w[e.v]).powi(2))
        .sum();
    Ok(WiredMonopole {
        level: k,
        values: w[..set.len()].to_vec(),
        vertices: set,
        energy,
    })
}

/// Energies `E(w_k)` of the wired monopoles for `k = 1..=last`.
pub fn monopole_energies(
    net: &Network,
    o: usize,
    plan: &ExhaustionPlan,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    (1..=plan.last_level(k_max))
        .map(|k| solve_monopole_wired(net, o, plan, k, MonopoleSign::Positive).map(|m| (k, m.energy)))
        .collect()
}

/// `v = fin + harm` with `fin` the energy projection of `v` onto functions
/// supported in `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoydenSplit {
    pub fin: VertexFunction,
    pub harm: VertexFunction,
    pub energy: f64,
    pub energy_fin: f64,
    pub energy_harm: f64,
    /// `⟨fin, harm⟩_E`.
    pub cross: f64,
}

pub fn royden_split(
    net: &Network,
    v: &VertexFunction,
    o: usize,
    plan: &ExhaustionPlan,
    k: usize,
) -> Result<RoydenSplit> {
    let n = net.vertex_count();
    if v.len() != n {
        return Err(Error::InvalidParameter("function length does not match the network".into()));
    }
    net.check_vertex(o)?;
    let set = plan.level(net, k)?;
    let mut inside = vec![false; n];
    for &x in &set {
        inside[x] = true;
    }
    let lap = apply_laplacian(net, v);
    let fin = if set.len() == n {
        v.ground_at(o)
    } else {
        let pins: Vec<usize> = (0..n).filter(|&x| !inside[x]).collect();
        let sys = GroundedSystem::with_pins(net, &pins, SolverKind::Auto, DEFAULT_TOLERANCE)?;
        VertexFunction::raw(sys.solve_grounded(lap.values())?)
    };
    let harm = v.sub(&fin);
    Ok(RoydenSplit {
        energy: energy(net, v, v),
        energy_fin: energy(net, &fin, &fin),
        energy_harm: energy(net, &harm, &harm),
        cross: energy(net, &fin, &harm),
        fin,
        harm,
    })
}

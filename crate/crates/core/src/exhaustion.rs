//! Nested finite subnetworks `G_1 ⊂ G_2 ⊂ …` used to approximate infinite
//! networks, plus boundary/interior bookkeeping for vertex sets.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

/// How the level sets of an exhaustion are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExhaustionRule {
    /// Hop-distance balls of radius `k` about the origin.
    Balls,
    /// Sup-norm cubes of radius `k` about the origin of a `lattice_box`.
    Cubes { dim: usize, side: usize },
    /// Caller-supplied nested sets; level `k` is `sets[k - 1]`.
    Explicit(Vec<Vec<usize>>),
}

/// An origin, a rule, and the largest level at which the truncation still
/// represents the infinite network faithfully (`None` for genuinely finite
/// networks, which are exhausted until the level set saturates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionPlan {
    pub origin: usize,
    pub rule: ExhaustionRule,
    pub max_level: Option<usize>,
}

impl ExhaustionPlan {
    pub fn balls(origin: usize) -> Self {
        ExhaustionPlan {
            origin,
            rule: ExhaustionRule::Balls,
            max_level: None,
        }
    }

    pub fn with_max_level(mut self, max_level: usize) -> Self {
        self.max_level = Some(max_level);
        self
    }

    pub fn with_rule(mut self, rule: ExhaustionRule) -> Self {
        self.rule = rule;
        self
    }

    /// Vertex set of `G_k`, sorted by id. Level 0 is the origin alone.
    pub fn level(&self, net: &Network, k: usize) -> Result<Vec<usize>> {
        net.check_vertex(self.origin)?;
        if let Some(max) = self.max_level {
            if k > max {
                return Err(Error::InvalidParameter(format!(
                    "exhaustion level {k} exceeds the truncation's valid range (max {max})"
                )));
            }
        }
        let mut set = match &self.rule {
            ExhaustionRule::Balls => ball(net, self.origin, k),
            ExhaustionRule::Cubes { dim, side } => cube(net, self.origin, *dim, *side, k)?,
            ExhaustionRule::Explicit(sets) => {
                if k == 0 {
                    vec![self.origin]
                } else {
                    let set = sets.get(k - 1).ok_or_else(|| {
                        Error::InvalidParameter(format!("no explicit level {k}"))
                    })?;
                    for &x in set {
                        net.check_vertex(x)?;
                    }
                    if !set.contains(&self.origin) {
                        return Err(Error::InvalidParameter(format!(
                            "explicit level {k} omits the origin"
                        )));
                    }
                    set.clone()
                }
            }
        };
        set.sort_unstable();
        set.dedup();
        Ok(set)
    }

    /// Highest level this plan may be asked for, capped at `k_max`.
    pub fn last_level(&self, k_max: usize) -> usize {
        let cap = match &self.rule {
            ExhaustionRule::Explicit(sets) => sets.len(),
            _ => usize::MAX,
        };
        k_max.min(self.max_level.unwrap_or(usize::MAX)).min(cap)
    }
}

/// Vertex set of level `k` of `plan` on `net`.
pub fn exhaustion(net: &Network, plan: &ExhaustionPlan, k: usize) -> Result<Vec<usize>> {
    plan.level(net, k)
}

fn ball(net: &Network, origin: usize, radius: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; net.vertex_count()];
    dist[origin] = 0;
    let mut out = vec![origin];
    let mut queue = VecDeque::from([origin]);
    while let Some(x) = queue.pop_front() {
        if dist[x] == radius {
            continue;
        }
        for (y, _) in net.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out
}

fn cube(net: &Network, origin: usize, dim: usize, side: usize, radius: usize) -> Result<Vec<usize>> {
    let expected = side.checked_pow(dim as u32);
    if expected != Some(net.vertex_count()) {
        return Err(Error::InvalidParameter(format!(
            "cube rule expects {side}^{dim} vertices, network has {}",
            net.vertex_count()
        )));
    }
    let decode = |mut id: usize| {
        let mut c = Vec::with_capacity(dim);
        for _ in 0..dim {
            c.push(id % side);
            id /= side;
        }
        c
    };
    let centre = decode(origin);
    Ok((0..net.vertex_count())
        .filter(|&id| {
            decode(id)
                .iter()
                .zip(&centre)
                .all(|(a, b)| a.abs_diff(*b) <= radius)
        })
        .collect())
}

/// Vertices of `set` having a neighbour outside it, sorted by id.
pub fn boundary_of(net: &Network, set: &[usize]) -> Result<Vec<usize>> {
    let inside = membership(net, set)?;
    let mut out: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&x| net.neighbors(x).any(|(y, _)| !inside[y]))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `set` minus its boundary, sorted by id.
pub fn interior_of(net: &Network, set: &[usize]) -> Result<Vec<usize>> {
    let inside = membership(net, set)?;
    let mut out: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&x| net.neighbors(x).all(|(y, _)| inside[y]))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub(crate) fn membership(net: &Network, set: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; net.vertex_count()];
    for &x in set {
        net.check_vertex(x)?;
        inside[x] = true;
    }
    Ok(inside)
}

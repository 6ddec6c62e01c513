//! Generators for the standard example families.
//!
//! Vertex layouts (part of the contract):
//!
//! | family | ids | conductances |
//! |---|---|---|
//! | `cycle(N)` | `0..N` around the cycle | 1 |
//! | `path(N)` | `0..N` along the path | 1 |
//! | `lattice_box(d, L)` | `Σ x_k L^k`, `x_0` fastest; origin at the centre (`L` odd) | 1 |
//! | `binary_tree(depth)` | heap order: children of `i` are `2i+1`, `2i+2` | 1 |
//! | `homogeneous_tree(q, depth)` | breadth-first; root has `q` children, others `q-1` | 1 |
//! | `geometric_integers(c, span, half)` | half: `n` at id `n`; full: `n` at id `n + span` | edge `{n-1, n}` has `c^max(|n|,|n-1|)` |
//! | `ladder(α, β, len)` | `x_n` at `n`, `y_n` at `len + 1 + n` | rails `α^n` on `{n-1, n}`, rung `n` is `β^n` |
//! | `star(m, c, depth)` | centre 0; arm `b`, position `n ≥ 1` at `1 + b·depth + n - 1` | `c^n` into position `n` |
//! | `square_example(ρ1..ρ4)` | `{0,1}` ρ1, `{0,2}` ρ2, `{1,3}` ρ3, `{2,3}` ρ4 | `1/ρ` |
//! | `deletion_example` | α=0, x1=1, x2=2, x3=3, ω=4 | 1 |
//!
//! Deleting the two edges at `x2` in the deletion example isolates `x2`, so the
//! post-deletion network drops it and renumbers: α=0, x1=1, x3=2, ω=3.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::ExhaustionPlan;
use crate::network::Network;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Cycle { n: usize },
    Path { n: usize },
    LatticeBox { dim: usize, side: usize },
    BinaryTree { depth: usize },
    HomogeneousTree { degree: usize, depth: usize },
    GeometricIntegers { c: f64, span: usize, half: bool },
    Ladder { alpha: f64, beta: f64, length: usize },
    Star { m: usize, c: f64, depth: usize },
    SquareExample { rho: [f64; 4] },
    DeletionExample { deleted: bool },
}

/// A generated network with its natural origin and default exhaustion plan.
#[derive(Debug, Clone)]
pub struct Generated {
    pub net: Network,
    pub plan: ExhaustionPlan,
}

impl Generated {
    pub fn origin(&self) -> usize {
        self.plan.origin
    }
}

/// Maps lattice coordinates (relative to the centre) to ids of a `lattice_box`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeLayout {
    pub dim: usize,
    pub side: usize,
}

impl LatticeLayout {
    pub fn half_width(&self) -> i64 {
        (self.side as i64 - 1) / 2
    }

    pub fn vertex_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn origin(&self) -> usize {
        self.index(&vec![0; self.dim]).expect("centre lies in the box")
    }

    /// Id of the vertex at centred coordinates `x`, if it lies in the box.
    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let m = self.half_width();
        let mut id = 0usize;
        let mut stride = 1usize;
        for &xk in x {
            if xk.abs() > m {
                return None;
            }
            id += (xk + m) as usize * stride;
            stride *= self.side;
        }
        Some(id)
    }

    /// Centred coordinates of vertex `id`.
    pub fn coords(&self, mut id: usize) -> Vec<i64> {
        let m = self.half_width();
        (0..self.dim)
            .map(|_| {
                let c = (id % self.side) as i64 - m;
                id /= self.side;
                c
            })
            .collect()
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorSpec::Cycle { n } if n < 3 => Err(invalid("cycle needs N >= 3")),
            GeneratorSpec::Path { n } if n < 1 => Err(invalid("path needs N >= 1")),
            GeneratorSpec::LatticeBox { dim, side } => {
                if dim < 1 {
                    Err(invalid("lattice_box needs d >= 1"))
                } else if side % 2 == 0 {
                    Err(invalid("lattice_box needs an odd side L so the origin is central"))
                } else if (side as f64).powi(dim as i32) > 5.0e7 {
                    Err(invalid("lattice_box is too large"))
                } else {
                    Ok(())
                }
            }
            GeneratorSpec::BinaryTree { depth } if depth > 24 => {
                Err(invalid("binary_tree depth above 24 is too large"))
            }
            GeneratorSpec::HomogeneousTree { degree, .. } if degree < 2 => {
                Err(invalid("homogeneous_tree needs degree >= 2"))
            }
            GeneratorSpec::HomogeneousTree { degree, depth } => {
                let size = (degree as f64) * ((degree - 1) as f64).powi(depth as i32);
                if size > 2.0e7 {
                    Err(invalid("homogeneous_tree is too large"))
                } else {
                    Ok(())
                }
            }
            GeneratorSpec::GeometricIntegers { c, span, .. } => {
                if !(c > 1.0) || !c.is_finite() {
                    Err(invalid("geometric_integers needs c > 1"))
                } else if span < 1 {
                    Err(invalid("geometric_integers needs span >= 1"))
                } else {
                    Ok(())
                }
            }
            GeneratorSpec::Ladder {
                alpha,
                beta,
                length,
            } => {
                if !(alpha > 1.0 && 1.0 > beta && beta > 0.0) || !alpha.is_finite() {
                    Err(invalid("ladder needs alpha > 1 > beta > 0"))
                } else if length < 1 {
                    Err(invalid("ladder needs length >= 1"))
                } else {
                    Ok(())
                }
            }
            GeneratorSpec::Star { m, c, depth } => {
                if m < 1 || depth < 1 {
                    Err(invalid("star needs m >= 1 and depth >= 1"))
                } else if !(c > 0.0) || !c.is_finite() {
                    Err(invalid("star needs c > 0"))
                } else {
                    Ok(())
                }
            }
            GeneratorSpec::SquareExample { rho } => {
                if rho.iter().all(|r| *r > 0.0 && r.is_finite()) {
                    Ok(())
                } else {
                    Err(invalid("square_example resistances must be positive"))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Builds the truncated network of `spec` with its default exhaustion plan.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    spec.validate()?;
    let (net, plan) = match *spec {
        GeneratorSpec::Cycle { n } => (
            Network::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))?,
            ExhaustionPlan::balls(0),
        ),
        GeneratorSpec::Path { n } => (
            Network::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0)))?,
            ExhaustionPlan::balls(n / 2),
        ),
        GeneratorSpec::LatticeBox { dim, side } => {
            let layout = LatticeLayout { dim, side };
            let count = layout.vertex_count();
            let mut edges = Vec::with_capacity(dim * count);
            let mut stride = 1;
            for _ in 0..dim {
                for id in 0..count {
                    if (id / stride) % side + 1 < side {
                        edges.push((id, id + stride, 1.0));
                    }
                }
                stride *= side;
            }
            let m = (side - 1) / 2;
            let mut plan = ExhaustionPlan::balls(layout.origin());
            if m >= 1 {
                plan = plan.with_max_level(m - 1);
            }
            (Network::from_edges(count, edges)?, plan)
        }
        GeneratorSpec::BinaryTree { depth } => {
            let count = (1usize << (depth + 1)) - 1;
            let net = Network::from_edges(count, (1..count).map(|i| ((i - 1) / 2, i, 1.0)))?;
            (
                net,
                ExhaustionPlan::balls(0).with_max_level(depth.saturating_sub(1)),
            )
        }
        GeneratorSpec::HomogeneousTree { degree, depth } => {
            let mut edges = Vec::new();
            let mut frontier = vec![0usize];
            let mut next_id = 1;
            for level in 0..depth {
                let children = if level == 0 { degree } else { degree - 1 };
                let mut next = Vec::with_capacity(frontier.len() * children);
                for &parent in &frontier {
                    for _ in 0..children {
                        edges.push((parent, next_id, 1.0));
                        next.push(next_id);
                        next_id += 1;
                    }
                }
                frontier = next;
            }
            (
                Network::from_edges(next_id, edges)?,
                ExhaustionPlan::balls(0).with_max_level(depth.saturating_sub(1)),
            )
        }
        GeneratorSpec::GeometricIntegers { c, span, half } => {
            let plan_max = span - 1;
            if half {
                let edges = (1..=span).map(|n| (n - 1, n, c.powi(n as i32)));
                (
                    Network::from_edges(span + 1, edges)?,
                    ExhaustionPlan::balls(0).with_max_level(plan_max),
                )
            } else {
                let s = span as i64;
                let edges = (-s + 1..=s).map(|n| {
                    let e = n.abs().max((n - 1).abs()) as i32;
                    ((n - 1 + s) as usize, (n + s) as usize, c.powi(e))
                });
                (
                    Network::from_edges(2 * span + 1, edges)?,
                    ExhaustionPlan::balls(span).with_max_level(plan_max),
                )
            }
        }
        GeneratorSpec::Ladder {
            alpha,
            beta,
            length,
        } => {
            let y = |n: usize| length + 1 + n;
            let mut edges = Vec::with_capacity(3 * length + 1);
            for n in 0..=length {
                edges.push((n, y(n), beta.powi(n as i32)));
                if n >= 1 {
                    let a = alpha.powi(n as i32);
                    edges.push((n - 1, n, a));
                    edges.push((y(n - 1), y(n), a));
                }
            }
            let labels = (0..=length)
                .map(|n| format!("x{n}"))
                .chain((0..=length).map(|n| format!("y{n}")))
                .collect();
            (
                Network::from_edges(2 * (length + 1), edges)?.with_labels(labels)?,
                ExhaustionPlan::balls(0).with_max_level(length - 1),
            )
        }
        GeneratorSpec::Star { m, c, depth } => {
            let id = |b: usize, n: usize| if n == 0 { 0 } else { 1 + b * depth + n - 1 };
            let edges = (0..m).flat_map(|b| (1..=depth).map(move |n| (id(b, n - 1), id(b, n), c.powi(n as i32))));
            (
                Network::from_edges(1 + m * depth, edges)?,
                ExhaustionPlan::balls(0).with_max_level(depth - 1),
            )
        }
        GeneratorSpec::SquareExample { rho } => {
            let pairs = [(0, 1), (0, 2), (1, 3), (2, 3)];
            let edges = pairs.iter().zip(rho).map(|(&(u, v), r)| (u, v, 1.0 / r));
            (Network::from_edges(4, edges)?, ExhaustionPlan::balls(0))
        }
        GeneratorSpec::DeletionExample { deleted } => {
            let (net, labels) = if deleted {
                (
                    Network::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])?,
                    vec!["alpha", "x1", "x3", "omega"],
                )
            } else {
                (
                    Network::from_edges(
                        5,
                        [
                            (0, 1, 1.0),
                            (0, 2, 1.0),
                            (0, 3, 1.0),
                            (1, 4, 1.0),
                            (2, 3, 1.0),
                            (3, 4, 1.0),
                        ],
                    )?,
                    vec!["alpha", "x1", "x2", "x3", "omega"],
                )
            };
            let labels = labels.into_iter().map(String::from).collect();
            (net.with_labels(labels)?, ExhaustionPlan::balls(0))
        }
    };
    Ok(Generated { net, plan })
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// Parses `family:key=val,key=val`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut args = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, found `{pair}`")))?;
            args.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut args = Args { family, args };
        let spec = match family.trim() {
            "cycle" => GeneratorSpec::Cycle { n: args.get("N")? },
            "path" => GeneratorSpec::Path { n: args.get("N")? },
            "lattice_box" => GeneratorSpec::LatticeBox {
                dim: args.get("d")?,
                side: args.get("L")?,
            },
            "binary_tree" => GeneratorSpec::BinaryTree {
                depth: args.get("depth")?,
            },
            "homogeneous_tree" => GeneratorSpec::HomogeneousTree {
                degree: args.get("degree")?,
                depth: args.get("depth")?,
            },
            "geometric_integers" => GeneratorSpec::GeometricIntegers {
                c: args.get("c")?,
                span: args.get("span")?,
                half: args.get_or("half", true)?,
            },
            "ladder" => GeneratorSpec::Ladder {
                alpha: args.get("alpha")?,
                beta: args.get("beta")?,
                length: args.get("length")?,
            },
            "star" => GeneratorSpec::Star {
                m: args.get("m")?,
                c: args.get_or("c", 1.0)?,
                depth: args.get("depth")?,
            },
            "square_example" => GeneratorSpec::SquareExample {
                rho: [
                    args.get_or("rho1", 1.0)?,
                    args.get_or("rho2", 1.0)?,
                    args.get_or("rho3", 1.0)?,
                    args.get_or("rho4", 1.0)?,
                ],
            },
            "deletion_example" => GeneratorSpec::DeletionExample {
                deleted: args.get_or("deleted", false)?,
            },
            other => return Err(invalid(format!("unknown generator family `{other}`"))),
        };
        args.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

struct Args<'a> {
    family: &'a str,
    args: BTreeMap<String, String>,
}

impl Args<'_> {
    fn get<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self
            .args
            .remove(key)
            .ok_or_else(|| invalid(format!("{} needs `{key}`", self.family)))?;
        raw.parse()
            .map_err(|_| invalid(format!("bad value `{raw}` for `{key}`")))
    }

    fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        if self.args.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn finish(self) -> Result<()> {
        match self.args.keys().next() {
            Some(k) => Err(invalid(format!("unknown key `{k}` for {}", self.family))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Cycle { n } => write!(f, "cycle:N={n}"),
            GeneratorSpec::Path { n } => write!(f, "path:N={n}"),
            GeneratorSpec::LatticeBox { dim, side } => write!(f, "lattice_box:d={dim},L={side}"),
            GeneratorSpec::BinaryTree { depth } => write!(f, "binary_tree:depth={depth}"),
            GeneratorSpec::HomogeneousTree { degree, depth } => {
                write!(f, "homogeneous_tree:degree={degree},depth={depth}")
            }
            GeneratorSpec::GeometricIntegers { c, span, half } => {
                write!(f, "geometric_integers:c={c},span={span},half={half}")
            }
            GeneratorSpec::Ladder {
                alpha,
                beta,
                length,
            } => write!(f, "ladder:alpha={alpha},beta={beta},length={length}"),
            GeneratorSpec::Star { m, c, depth } => write!(f, "star:m={m},c={c},depth={depth}"),
            GeneratorSpec::SquareExample { rho } => write!(
                f,
                "square_example:rho1={},rho2={},rho3={},rho4={}",
                rho[0], rho[1], rho[2], rho[3]
            ),
            GeneratorSpec::DeletionExample { deleted } => {
                write!(f, "deletion_example:deleted={deleted}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(s: &str) -> Network {
        generate(&s.parse().unwrap()).unwrap().net
    }

    #[test]
    fn cycle_four() {
        let net = gen("cycle:N=4");
        assert_eq!((net.vertex_count(), net.edge_count()), (4, 4));
        assert!(net.edges().iter().all(|e| e.conductance == 1.0));
    }

    #[test]
    fn geometric_half_line() {
        let net = gen("geometric_integers:c=2,span=3,half=true");
        let c: Vec<f64> = net.edges().iter().map(|e| e.conductance).collect();
        assert_eq!(c, vec![2.0, 4.0, 8.0]);
        assert_eq!(net.conductance(2, 3), Some(8.0));
    }

    #[test]
    fn geometric_full_line_is_symmetric() {
        let net = gen("geometric_integers:c=2,span=3,half=false");
        assert_eq!(net.vertex_count(), 7);
        assert_eq!(net.conductance(3, 4), Some(2.0));
        assert_eq!(net.conductance(2, 3), Some(2.0));
        assert_eq!(net.conductance(0, 1), Some(8.0));
    }

    #[test]
    fn binary_tree_depth_zero_is_a_point() {
        let net = gen("binary_tree:depth=0");
        assert_eq!((net.vertex_count(), net.edge_count()), (1, 0));
    }

    #[test]
    fn closed_form_counts() {
        for d in 0..8 {
            let net = generate(&GeneratorSpec::BinaryTree { depth: d }).unwrap().net;
            assert_eq!(net.vertex_count(), (1 << (d + 1)) - 1);
        }
        let net = gen("homogeneous_tree:degree=3,depth=3");
        assert_eq!(net.vertex_count(), 1 + 3 + 6 + 12);
        let net = gen("lattice_box:d=3,L=5");
        assert_eq!((net.vertex_count(), net.edge_count()), (125, 3 * 4 * 25));
        let net = gen("ladder:alpha=3,beta=0.5,length=4");
        assert_eq!((net.vertex_count(), net.edge_count()), (10, 13));
        let net = gen("star:m=3,c=2,depth=4");
        assert_eq!((net.vertex_count(), net.edge_count()), (13, 12));
        assert_eq!(net.conductance(0, 5), Some(2.0));
        assert_eq!(net.conductance(5, 6), Some(4.0));
    }

    #[test]
    fn lattice_layout_round_trip() {
        let layout = LatticeLayout { dim: 3, side: 5 };
        assert_eq!(layout.origin(), 62);
        for id in 0..layout.vertex_count() {
            assert_eq!(layout.index(&layout.coords(id)), Some(id));
        }
        assert_eq!(layout.index(&[3, 0, 0]), None);
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "cycle:N=5",
            "ladder:alpha=3,beta=0.5,length=30",
            "geometric_integers:c=2,span=30,half=false",
            "deletion_example:deleted=true",
        ] {
            let spec: GeneratorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("cycle:N=2".parse::<GeneratorSpec>().is_err());
        assert!("cycle:N=5,x=1".parse::<GeneratorSpec>().is_err());
        assert!("ladder:alpha=0.5,beta=0.2,length=3".parse::<GeneratorSpec>().is_err());
        assert!("geometric_integers:c=1,span=3".parse::<GeneratorSpec>().is_err());
    }
}

//! Vertex functions (potentials) and currents (antisymmetric edge functions).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

/// Representative convention for a vertex function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    /// Values are pinned so that `v(o) = 0`.
    Grounded(usize),
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
    rep: Rep,
}

impl VertexFunction {
    pub fn raw(values: Vec<f64>) -> Self {
        VertexFunction {
            values,
            rep: Rep::Raw,
        }
    }

    /// Shifts `values` by a constant so that `v(o) = 0` exactly.
    pub fn grounded(mut values: Vec<f64>, o: usize) -> Self {
        let shift = values[o];
        if shift != 0.0 {
            values.iter_mut().for_each(|v| *v -= shift);
        }
        values[o] = 0.0;
        VertexFunction {
            values,
            rep: Rep::Grounded(o),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::raw(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::raw(vec![value; n])
    }

    /// The Dirac mass `δ_x`.
    pub fn dirac(n: usize, x: usize) -> Self {
        let mut v = vec![0.0; n];
        v[x] = 1.0;
        Self::raw(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    /// Re-grounds a copy at `o`.
    pub fn ground_at(&self, o: usize) -> Self {
        Self::grounded(self.values.clone(), o)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::raw(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::raw(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::raw(self.values.iter().map(|a| s * a).collect())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Compares modulo constants unless both sides are raw.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.rep == Rep::Raw && other.rep == Rep::Raw {
            return self.sub(other).max_abs() <= tol;
        }
        let d = self.sub(other);
        let (lo, hi) = d
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        d.is_empty() || hi - lo <= tol
    }

    /// Text form: one `v <id> <value>` line per vertex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "v {i} {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: idx + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 || f[0] != "v" {
                return Err(bad("expected `v <id> <value>`"));
            }
            let id: usize = f[1].parse().map_err(|_| bad("bad vertex id"))?;
            let val: f64 = f[2].parse().map_err(|_| bad("bad value"))?;
            pairs.push((id, val));
        }
        let n = pairs.iter().map(|p| p.0 + 1).max().unwrap_or(0);
        let mut values = vec![0.0; n];
        for (id, val) in pairs {
            values[id] = val;
        }
        Ok(Self::raw(values))
    }
}

/// An antisymmetric function on oriented edges, stored once per edge in the
/// canonical `u < v` orientation with the network's edge indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Current {
    values: Vec<f64>,
}

impl Current {
    pub fn zeros(net: &Network) -> Self {
        Current {
            values: vec![0.0; net.edge_count()],
        }
    }

    /// Wraps per-edge values given in canonical orientation.
    pub fn from_values(values: Vec<f64>) -> Self {
        Current { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `I(x, y)` for adjacent `x`, `y`, with the orientation sign applied.
    pub fn get(&self, net: &Network, x: usize, y: usize) -> Result<f64> {
        let idx = net
            .edge_index(x, y)
            .ok_or(Error::NotAdjacent { from: x, to: y })?;
        Ok(self.oriented(idx, x < y))
    }

    /// `I(x, y)` on edge `idx`, where `forward` means `x < y`.
    pub fn oriented(&self, idx: usize, forward: bool) -> f64 {
        if forward {
            self.values[idx]
        } else {
            -self.values[idx]
        }
    }

    /// Adds `amount` to `I(x, y)` (and hence subtracts it from `I(y, x)`).
    pub fn push(&mut self, net: &Network, x: usize, y: usize, amount: f64) -> Result<()> {
        let idx = net
            .edge_index(x, y)
            .ok_or(Error::NotAdjacent { from: x, to: y })?;
        self.values[idx] += if x < y { amount } else { -amount };
        Ok(())
    }

    /// Characteristic current of a walk: one unit along each traversed edge.
    pub fn along_path(net: &Network, path: &[usize]) -> Result<Self> {
        let mut c = Self::zeros(net);
        for w in path.windows(2) {
            c.push(net, w[0], w[1], 1.0)?;
        }
        Ok(c)
    }

    /// Unit current on the single edge `x → y`.
    pub fn edge_dirac(net: &Network, x: usize, y: usize) -> Result<Self> {
        Self::along_path(net, &[x, y])
    }

    pub fn add(&self, other: &Self) -> Self {
        Current {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Current {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Current {
            values: self.values.iter().map(|a| s * a).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Text form: one `c <u> <v> <value>` line per edge, meaning `I(u,v) = value`.
    pub fn to_text(&self, net: &Network) -> String {
        let mut out = String::new();
        for (e, v) in net.edges().iter().zip(&self.values) {
            let _ = writeln!(out, "c {} {} {}", e.u, e.v, v);
        }
        out
    }

    pub fn parse(net: &Network, text: &str) -> Result<Self> {
        let mut cur = Self::zeros(net);
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: idx + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "c" {
                return Err(bad("expected `c <u> <v> <value>`"));
            }
            let u: usize = f[1].parse().map_err(|_| bad("bad vertex id"))?;
            let v: usize = f[2].parse().map_err(|_| bad("bad vertex id"))?;
            let val: f64 = f[3].parse().map_err(|_| bad("bad value"))?;
            cur.push(net, u, v, val)?;
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grounding_pins_exact_zero() {
        let v = VertexFunction::grounded(vec![0.3, 1.7, -2.0], 1);
        assert_eq!(v.get(1), 0.0);
        assert_eq!(v.rep(), Rep::Grounded(1));
        let w = VertexFunction::raw(vec![5.3, 6.7, 3.0]);
        assert!(v.approx_eq(&w, 1e-12));
    }

    #[test]
    fn current_antisymmetry() {
        let net = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let c = Current::along_path(&net, &[2, 1, 0]).unwrap();
        assert_eq!(c.get(&net, 0, 1).unwrap(), -1.0);
        assert_eq!(c.get(&net, 1, 0).unwrap(), 1.0);
        assert!(c.get(&net, 0, 2).is_err());
    }

    #[test]
    fn text_round_trip() {
        let net = Network::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let c = Current::from_values(vec![0.25, -1.5]);
        assert_eq!(Current::parse(&net, &c.to_text(&net)).unwrap(), c);
        let v = VertexFunction::raw(vec![0.1, 0.2, 1e-30]);
        assert_eq!(VertexFunction::parse(&v.to_text()).unwrap(), v);
    }
}

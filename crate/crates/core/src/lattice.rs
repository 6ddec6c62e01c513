//! Closed forms on the unit-conductance lattice `Z^d`, evaluated by
//! quadrature over the torus `[−π, π]^d`.
//!
//! Bounded integrands use the tensor midpoint rule; the error estimate is the
//! change from `n/2` to `n` points per axis. Integrands with a `1/|t|²`
//! singularity are split as
//!
//! ```text
//! g/S = (g/S − χ(|t|)/|t|²) + χ(|t|)/|t|²
//! ```
//!
//! with `χ` a smooth radial cutoff. The second term is a one-dimensional
//! radial integral. The first is bounded and is integrated on the base grid
//! with the cells around the origin replaced by dyadic refinement levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `S(t) = 4 Σ sin²(t_k / 2)`.
pub fn symbol(t: &[f64]) -> f64 {
    4.0 * t.iter().map(|x| (x / 2.0).sin().powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSymbol {
    pub dim: usize,
}

impl LatticeSymbol {
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.dim,
                t.len()
            )));
        }
        Ok(symbol(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub dim: usize,
    /// Midpoint nodes per axis on the base grid; a multiple of 4.
    pub n: usize,
    /// Dyadic refinement levels around the origin (singular integrands only).
    pub levels: usize,
    /// Cells per axis on each refinement level; a multiple of 4.
    pub cells_per_level: usize,
}

impl QuadratureGrid {
    pub fn new(dim: usize) -> Self {
        QuadratureGrid {
            dim,
            n: if dim <= 3 { 64 } else { 32 },
            levels: 3,
            cells_per_level: 8,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!(
                "lattice dimension must be 1..=6, got {}",
                self.dim
            )));
        }
        if self.n < 4 || !self.n.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be a positive multiple of 4, got {}",
                self.n
            )));
        }
        if self.cells_per_level < 4 || !self.cells_per_level.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "cells per level must be a positive multiple of 4, got {}",
                self.cells_per_level
            )));
        }
        if self.levels == 0 {
            return Err(Error::InvalidParameter("at least one refinement level is needed".into()));
        }
        Ok(())
    }

    fn check_point(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "expected a point of Z^{}, got {} coordinates",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub error: f64,
}

/// Midpoint sum of `f` over the cube `[−a, a]^d` split into `m^d` cells,
/// skipping the central `(2·skip)^d` cells. Returns the integral, not the mean.
fn cube_sum<F>(d: usize, a: f64, m: usize, skip: usize, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let h = 2.0 * a / m as f64;
    let node = |i: usize| -a + (i as f64 + 0.5) * h;
    let lo = m / 2 - skip;
    let hi = m / 2 + skip;
    let central = |i: usize| skip > 0 && (lo..hi).contains(&i);
    let rest = m.pow(d as u32 - 1);
    let slabs: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i0| {
            let mut t = vec![0.0; d];
            t[0] = node(i0);
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            let mut sum = 0.0;
            for flat in 0..rest {
                let mut r = flat;
                for k in 1..d {
                    idx[k] = r % m;
                    r /= m;
                    t[k] = node(idx[k]);
                }
                if idx.iter().all(|&i| central(i)) {
                    continue;
                }
                sum += f(&t);
            }
            sum
        })
        .collect();
    slabs.iter().sum::<f64>() * h.powi(d as i32)
}

/// `(2π)^{−d} ∫ f` on base grids `n` and `n/2`.
fn bounded<F>(grid: &QuadratureGrid, f: F) -> QuadratureValue
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let norm = (2.0 * std::f64::consts::PI).powi(grid.dim as i32);
    let pi = std::f64::consts::PI;
    let fine = cube_sum(grid.dim, pi, grid.n, 0, &f) / norm;
    let coarse = cube_sum(grid.dim, pi, grid.n / 2, 0, &f) / norm;
    QuadratureValue {
        value: fine,
        error: (fine - coarse).abs(),
    }
}

const CUT_INNER: f64 = 0.5;
const CUT_OUTER: f64 = 3.0;

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Radial cutoff: 1 on `[0, 0.5]`, 0 beyond 3, smooth in between.
fn cutoff(r: f64) -> f64 {
    let u = (r - CUT_INNER) / (CUT_OUTER - CUT_INNER);
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let (a, b) = (smooth_step(1.0 - u), smooth_step(u));
        a / (a + b)
    }
}

/// Surface area of the unit sphere in `R^d`.
fn sphere_area(d: usize) -> f64 {
    let pi = std::f64::consts::PI;
    // Γ(d/2) by the half-integer recursion
    let mut gamma = if d.is_multiple_of(2) { 1.0 } else { pi.sqrt() };
    let mut s = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    while s + 1e-9 < d as f64 / 2.0 {
        gamma *= s;
        s += 1.0;
    }
    2.0 * pi.powf(d as f64 / 2.0) / gamma
}

/// `∫_{R^d} χ(|t|) / |t|² dt` for `d ≥ 3`.
fn cutoff_integral(d: usize) -> f64 {
    let p = d as i32 - 3;
    let inner = CUT_INNER.powi(p + 1) / (p + 1) as f64;
    // composite Simpson on the transition band
    let m = 4096;
    let h = (CUT_OUTER - CUT_INNER) / m as f64;
    let g = |r: f64| cutoff(r) * r.powi(p);
    let mut s = g(CUT_INNER) + g(CUT_OUTER);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(CUT_INNER + i as f64 * h);
    }
    sphere_area(d) * (inner + s * h / 3.0)
}

/// Graded-mesh integral of `f` over the torus with base `n` per axis:
/// returns the estimate after each refinement level.
fn graded<F>(grid: &QuadratureGrid, n: usize, f: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (d, m) = (grid.dim, grid.cells_per_level);
    let pi = std::f64::consts::PI;
    let mut partial = cube_sum(d, pi, n, 1, f);
    let mut a = 2.0 * pi / n as f64;
    let mut estimates = Vec::with_capacity(grid.levels);
    for _ in 0..grid.levels {
        estimates.push(partial + cube_sum(d, a, m, 0, f));
        partial += cube_sum(d, a, m, m / 4, f);
        a /= 2.0;
    }
    estimates
}

/// `(2π)^{−d} ∫ g/S` for smooth `g` with `g(0) = 1`, `d ≥ 3`. The error is
/// the change from the last refinement level plus the change from `n/2` to `n`.
fn singular<G>(grid: &QuadratureGrid, g: G) -> QuadratureValue
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let remainder = |t: &[f64]| {
        let r2: f64 = t.iter().map(|x| x * x).sum();
        g(t) / symbol(t) - cutoff(r2.sqrt()) / r2
    };
    let fine = graded(grid, grid.n, &remainder);
    let coarse = graded(grid, grid.n / 2, &remainder);
    let last = fine[fine.len() - 1];
    let mut error = (last - coarse[coarse.len() - 1]).abs();
    if fine.len() > 1 {
        error += (last - fine[fine.len() - 2]).abs();
    }
    let norm = (2.0 * std::f64::consts::PI).powi(grid.dim as i32);
    QuadratureValue {
        value: (last + cutoff_integral(grid.dim)) / norm,
        error: error / norm,
    }
}

fn dot(x: &[i64], t: &[f64]) -> f64 {
    x.iter().zip(t).map(|(&a, b)| a as f64 * b).sum()
}

/// `R(x, y) = (2π)^{−d} ∫ sin²((x − y)·t / 2) / Σ sin²(t_k / 2) dt`.
pub fn lattice_resistance(grid: &QuadratureGrid, x: &[i64], y: &[i64]) -> Result<QuadratureValue> {
    grid.validate()?;
    grid.check_point(x)?;
    grid.check_point(y)?;
    let z: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if z.iter().all(|&c| c == 0) {
        return Ok(QuadratureValue { value: 0.0, error: 0.0 });
    }
    Ok(bounded(grid, |t| {
        let s: f64 = t.iter().map(|x| (x / 2.0).sin().powi(2)).sum();
        (dot(&z, t) / 2.0).sin().powi(2) / s
    }))
}

/// Energy kernel `v_x(y)` grounded at the origin:
/// `(2π)^{−d} ∫ [1 − cos x·t − cos y·t + cos (x−y)·t] / S(t) dt`.
pub fn lattice_vx(grid: &QuadratureGrid, x: &[i64], y: &[i64]) -> Result<QuadratureValue> {
    grid.validate()?;
    grid.check_point(x)?;
    grid.check_point(y)?;
    if x.iter().all(|&c| c == 0) || y.iter().all(|&c| c == 0) {
        return Ok(QuadratureValue { value: 0.0, error: 0.0 });
    }
    Ok(bounded(grid, |t| {
        let (px, py) = (dot(x, t), dot(y, t));
        // (1 − cos px)(1 − cos py) + sin px sin py, written without cancellation at t ≈ 0
        let num = 4.0 * (px / 2.0).sin().powi(2) * (py / 2.0).sin().powi(2) + px.sin() * py.sin();
        num / symbol(t)
    }))
}

fn require_transient(grid: &QuadratureGrid) -> Result<()> {
    grid.validate()?;
    if grid.dim < 3 {
        return Err(Error::InvalidParameter(format!(
            "Z^{} is recurrent: ∫ 1/S diverges, so there is no finite resistance to infinity or monopole (needs d >= 3)",
            grid.dim
        )));
    }
    Ok(())
}

/// `R_∞ = 2 (2π)^{−d} ∫ dt / S(t)`, for `d ≥ 3`.
pub fn lattice_rinf(grid: &QuadratureGrid) -> Result<QuadratureValue> {
    require_transient(grid)?;
    let q = singular(grid, |_| 1.0);
    Ok(QuadratureValue {
        value: 2.0 * q.value,
        error: 2.0 * q.error,
    })
}

/// Monopole `w(x) = −(2π)^{−d} ∫ cos(x·t) / S(t) dt`, with `Δw = −δ_0`.
pub fn lattice_monopole(grid: &QuadratureGrid, x: &[i64]) -> Result<QuadratureValue> {
    require_transient(grid)?;
    grid.check_point(x)?;
    let q = singular(grid, |t| dot(x, t).cos());
    Ok(QuadratureValue {
        value: -q.value,
        error: q.error,
    })
}

/// `Δf(x) = Σ_{±e_k} (f(x) − f(x ± e_k))` for a lattice function `f`.
pub fn lattice_laplacian<F>(x: &[i64], mut f: F) -> Result<f64>
where
    F: FnMut(&[i64]) -> Result<f64>,
{
    let fx = f(x)?;
    let mut total = 0.0;
    let mut y = x.to_vec();
    for k in 0..x.len() {
        for step in [-1, 1] {
            y[k] = x[k] + step;
            total += fx - f(&y)?;
        }
        y[k] = x[k];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_values() {
        let pi = std::f64::consts::PI;
        assert_eq!(symbol(&[0.0, 0.0]), 0.0);
        assert!((symbol(&[pi]) - 4.0).abs() < 1e-15);
        assert!((symbol(&[pi, pi, pi]) - 12.0).abs() < 1e-14);
        assert!(LatticeSymbol { dim: 2 }.eval(&[0.0]).is_err());
    }

    #[test]
    fn one_dimensional_distance() {
        let g = QuadratureGrid::new(1);
        for z in 1..6 {
            let r = lattice_resistance(&g, &[0], &[z]).unwrap();
            assert!((r.value - z as f64).abs() < 1e-12, "{z}: {r:?}");
        }
        let v = lattice_vx(&g, &[1], &[1]).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!(lattice_vx(&g, &[1], &[0]).unwrap().value, 0.0);
    }

    #[test]
    fn cutoff_is_smooth_partition() {
        assert_eq!(cutoff(0.2), 1.0);
        assert_eq!(cutoff(3.5), 0.0);
        assert!((cutoff(1.75) - 0.5).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn low_dimensions_have_no_monopole() {
        assert!(lattice_rinf(&QuadratureGrid::new(2)).is_err());
        assert!(lattice_monopole(&QuadratureGrid::new(1), &[0]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(lattice_rinf(&QuadratureGrid::new(3).with_n(30)).is_err());
        assert!(lattice_rinf(&QuadratureGrid::new(3).with_levels(0)).is_err());
    }

    #[test]
    fn cubic_lattice_constants() {
        let g = QuadratureGrid::new(3);
        let rinf = lattice_rinf(&g).unwrap();
        assert!((rinf.value - 0.505462).abs() < 5e-4);
        assert!(rinf.error < 1e-5);
        let w0 = lattice_monopole(&g, &[0, 0, 0]).unwrap();
        assert!((w0.value + rinf.value / 2.0).abs() < 1e-12);
        let r = lattice_resistance(&g, &[0, 0, 0], &[1, 1, 1]).unwrap();
        let w = lattice_monopole(&g, &[1, 1, 1]).unwrap();
        assert!((w.value - 0.5 * (r.value - rinf.value)).abs() < 1e-5);
        let lap = lattice_laplacian(&[0, 0, 0], |x| Ok(lattice_monopole(&g, x)?.value)).unwrap();
        assert!((lap + 1.0).abs() < 5e-3, "{lap}");
    }
}

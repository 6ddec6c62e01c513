//! A nonconstant harmonic function on the one-sided ladder with rails
//! `c_{n-1,n} = α^n` and rungs `c_{x_n,y_n} = β^n`.
//!
//! Top rail: `u(x_0) = 0`, `u(x_1) = 1/α` and
//! `u(n+1) = u(n) + (u(n) − u(n−1))/α + (2/α)(β/α)^n u(n) + (1/α)(β/α)^n`.
//! Bottom rail: `u(y_n) = −1 − u(x_n)`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::defect::{pow, rational};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;

#[derive(Debug, Clone)]
pub struct LadderHarmonic {
    alpha: f64,
    beta: f64,
    top: Vec<f64>,
    steps: Vec<f64>,
    top_exact: Vec<BigRational>,
    alpha_exact: BigRational,
    beta_exact: BigRational,
}

pub fn ladder_harmonic(alpha: f64, beta: f64, n_max: usize) -> Result<LadderHarmonic> {
    if !(alpha > 1.0 && 1.0 > beta && beta > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter("ladder needs alpha > 1 > beta > 0".into()));
    }
    if n_max < 2 {
        return Err(Error::InvalidParameter("ladder needs n_max >= 2".into()));
    }
    let a = rational(alpha)?;
    let b = rational(beta)?;
    let ratio = &b / &a;
    let two = BigRational::from_integer(2.into());

    let mut top_exact = vec![BigRational::zero(), a.recip()];
    for n in 1..n_max {
        let rn = pow(&ratio, n);
        let (u, prev) = (&top_exact[n], &top_exact[n - 1]);
        let next = u + (u - prev) / &a + &two / &a * &rn * u + &rn / &a;
        top_exact.push(next);
    }

    // increments carried directly so that α^n-weighted differences stay accurate
    let mut top = vec![0.0, 1.0 / alpha];
    let mut steps = vec![1.0 / alpha];
    for n in 1..n_max {
        let rn = (beta / alpha).powi(n as i32);
        let step = steps[n - 1] / alpha + rn * (2.0 * top[n] + 1.0) / alpha;
        steps.push(step);
        top.push(top[n] + step);
    }
    Ok(LadderHarmonic {
        alpha,
        beta,
        top,
        steps,
        top_exact,
        alpha_exact: a,
        beta_exact: b,
    })
}

impl LadderHarmonic {
    pub fn n_max(&self) -> usize {
        self.top.len() - 1
    }

    pub fn top(&self, n: usize) -> f64 {
        self.top[n]
    }

    pub fn bottom(&self, n: usize) -> f64 {
        -1.0 - self.top[n]
    }

    pub fn top_exact(&self, n: usize) -> &BigRational {
        &self.top_exact[n]
    }

    pub fn bottom_exact(&self, n: usize) -> BigRational {
        -BigRational::one() - &self.top_exact[n]
    }

    /// `u(n+1) − u(n)` on the top rail.
    pub fn step(&self, n: usize) -> f64 {
        self.steps[n]
    }

    /// Exact `Δu` at every interior vertex: `(n, at x_n, at y_n)` for `n < n_max`.
    pub fn residuals_exact(&self) -> Vec<(usize, BigRational, BigRational)> {
        let a = &self.alpha_exact;
        let b = &self.beta_exact;
        let bottom: Vec<BigRational> = (0..=self.n_max()).map(|n| self.bottom_exact(n)).collect();
        let stencil = |rail: &[BigRational], other: &[BigRational], n: usize| {
            let u = &rail[n];
            let mut s = pow(b, n) * (u - &other[n]) + pow(a, n + 1) * (u - &rail[n + 1]);
            if n > 0 {
                s += pow(a, n) * (u - &rail[n - 1]);
            }
            s
        };
        (0..self.n_max())
            .map(|n| {
                (
                    n,
                    stencil(&self.top_exact, &bottom, n),
                    stencil(&bottom, &self.top_exact, n),
                )
            })
            .collect()
    }

    /// Float `Δu(x_n)` in current form, using carried increments for the rail
    /// differences. The bottom rail value is its negative by symmetry.
    pub fn residuals(&self) -> Vec<f64> {
        let (a, b) = (self.alpha, self.beta);
        (0..self.n_max())
            .map(|n| {
                let rung = b.powi(n as i32) * (2.0 * self.top[n] + 1.0);
                let out = a.powi(n as i32 + 1) * self.steps[n];
                let inward = if n == 0 {
                    0.0
                } else {
                    a.powi(n as i32) * self.steps[n - 1]
                };
                inward - out + rung
            })
            .collect()
    }

    /// Float `Δu(x_n)` from rounded vertex values alone.
    pub fn residuals_from_values(&self) -> Vec<f64> {
        let (a, b) = (self.alpha, self.beta);
        let u = &self.top;
        (0..self.n_max())
            .map(|n| {
                let mut s = b.powi(n as i32) * (u[n] - self.bottom(n))
                    + a.powi(n as i32 + 1) * (u[n] - u[n + 1]);
                if n > 0 {
                    s += a.powi(n as i32) * (u[n] - u[n - 1]);
                }
                s
            })
            .collect()
    }

    /// Partial sums `Σ_{n<N} α^{n+1} (u(n+1) − u(n))²` of the rail energy.
    pub fn partial_energies(&self) -> Vec<f64> {
        let mut total = 0.0;
        self.steps
            .iter()
            .enumerate()
            .map(|(n, d)| {
                total += self.alpha.powi(n as i32 + 1) * d * d;
                total
            })
            .collect()
    }

    /// Partial sums of the full ladder energy (both rails and all rungs up to `N`).
    pub fn total_partial_energies(&self) -> Vec<f64> {
        let b = self.beta;
        let mut total = 0.0;
        self.steps
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let rung = 2.0 * self.top[n] + 1.0;
                total += 2.0 * self.alpha.powi(n as i32 + 1) * d * d + b.powi(n as i32) * rung * rung;
                total
            })
            .collect()
    }

    /// Upper bound on `u(n+1) − u(n)` from iterating the recursion with
    /// `u(k+1) ≤ 2u(k) + 1/α` (valid when `(β/α)^k < (α − 1)/2` for all `k`).
    pub fn step_bound(&self, n: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let bn = b.powi(n as i32);
        let tail: f64 = (0..n)
            .map(|k| 2f64.powi(k as i32) * (b.powi(k as i32) - bn) / (1.0 - b))
            .sum();
        let inner = 1.0 + b * (1.0 - bn) / (1.0 - b) + (2.0 * b).powi(n as i32) / a + 2.0 * b / a * tail;
        inner / a.powi(n as i32 + 1)
    }

    /// `Σ_n α^{n+1} step_bound(n)²`, summed until terms drop below `1e-18`
    /// of the running total.
    pub fn energy_bound(&self) -> f64 {
        let mut total = 0.0;
        for n in 0..10_000 {
            let s = self.step_bound(n);
            let term = self.alpha.powi(n as i32 + 1) * s * s;
            total += term;
            if !term.is_finite() {
                return f64::INFINITY;
            }
            if n > 10 && term < 1e-18 * total {
                break;
            }
        }
        total
    }

    /// Whether the recursion's growth estimate applies from the first step.
    pub fn bound_applies(&self) -> bool {
        self.beta / self.alpha < (self.alpha - 1.0) / 2.0 && self.alpha > 4.0 * self.beta * self.beta
    }

    /// `u` laid out as on `ladder(α, β, length = n_max)`.
    pub fn to_vertex_function(&self) -> VertexFunction {
        let bottom = (0..=self.n_max()).map(|n| self.bottom(n));
        VertexFunction::raw(self.top.iter().copied().chain(bottom).collect())
    }
}

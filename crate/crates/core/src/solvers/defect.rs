//! The defect vector `u` with `Δu = -u` on the geometric integers
//! (`c_{n-1,n} = c^n`), built from the polynomial pairs
//! `p_{n+1} = p_n + q_n`, `q_{n+1} = q_n + r^{n+1} p_{n+1}`, `r = 1/c`, with
//! `u(n) = q_n` and `p_n = c^n (u(n) − u(n−1))`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::VertexFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectVariant {
    /// `Z_+`: `p_0 = 0`, `q_0 = 1`.
    HalfLine,
    /// `Z`, symmetric about 0: `q_0 = 1`, `p_1 = 1/2`.
    FullLine,
}

#[derive(Debug, Clone)]
pub struct DefectSequence {
    c: f64,
    variant: DefectVariant,
    c_exact: BigRational,
    p: Vec<BigRational>,
    q: Vec<BigRational>,
    p_float: Vec<f64>,
    q_float: Vec<f64>,
    step_float: Vec<f64>,
}

pub(crate) fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not finite")))
}

pub(crate) fn pow(x: &BigRational, n: usize) -> BigRational {
    num_traits::pow(x.clone(), n)
}

/// Computes `(p_n, q_n)` for `n ≤ n_max` exactly and in floating point.
pub fn defect_sequence(c: f64, variant: DefectVariant, n_max: usize) -> Result<DefectSequence> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter("defect sequence needs c > 1".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("defect sequence needs n_max >= 1".into()));
    }
    let c_exact = rational(c)?;
    let r = c_exact.recip();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));

    let mut p = vec![BigRational::zero()];
    let mut q = vec![BigRational::one()];
    let mut p_float = vec![0.0];
    let mut q_float = vec![1.0];
    let mut step_float = Vec::with_capacity(n_max);
    let rf = 1.0 / c;
    for n in 0..n_max {
        let k = n + 1;
        let (pk, pkf) = if n == 0 && variant == DefectVariant::FullLine {
            (half.clone(), 0.5)
        } else {
            (&p[n] + &q[n], p_float[n] + q_float[n])
        };
        let qk = &q[n] + pow(&r, k) * &pk;
        let step = rf.powi(k as i32) * pkf;
        p_float.push(pkf);
        q_float.push(q_float[n] + step);
        step_float.push(step);
        p.push(pk);
        q.push(qk);
    }
    Ok(DefectSequence {
        c,
        variant,
        c_exact,
        p,
        q,
        p_float,
        q_float,
        step_float,
    })
}

impl DefectSequence {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn variant(&self) -> DefectVariant {
        self.variant
    }

    pub fn n_max(&self) -> usize {
        self.q.len() - 1
    }

    pub fn p_exact(&self, n: usize) -> &BigRational {
        &self.p[n]
    }

    pub fn q_exact(&self, n: usize) -> &BigRational {
        &self.q[n]
    }

    /// `u(n)` as an exact rational (`u(-n) = u(n)` on the full line).
    pub fn u_exact(&self, n: i64) -> &BigRational {
        &self.q[n.unsigned_abs() as usize]
    }

    pub fn p(&self, n: usize) -> f64 {
        self.p_float[n]
    }

    /// `u(n)` from the floating-point recursion.
    pub fn u(&self, n: i64) -> f64 {
        self.q_float[n.unsigned_abs() as usize]
    }

    /// Largest relative gap between the float mirror and the exact values.
    pub fn float_agreement(&self) -> f64 {
        self.q
            .iter()
            .zip(&self.q_float)
            .chain(self.p.iter().zip(&self.p_float))
            .map(|(e, f)| {
                let e = e.to_f64().unwrap_or(f64::NAN);
                if e == 0.0 {
                    f.abs()
                } else {
                    ((e - f) / e).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    fn conductance_exact(&self, k: usize) -> BigRational {
        pow(&self.c_exact, k)
    }

    /// Exact `Δu(n) + u(n)` at the interior vertices `n = 0..n_max`
    /// (nonnegative side; the full line is symmetric).
    pub fn residuals_exact(&self) -> Vec<BigRational> {
        (0..self.n_max())
            .map(|n| {
                let u = &self.q[n];
                let right = self.conductance_exact(n + 1) * (u - &self.q[n + 1]);
                let left = match (n, self.variant) {
                    (0, DefectVariant::HalfLine) => BigRational::zero(),
                    (0, DefectVariant::FullLine) => right.clone(),
                    _ => self.conductance_exact(n) * (u - &self.q[n - 1]),
                };
                left + right + u
            })
            .collect()
    }

    /// Float `Δu(n) + u(n)` at interior vertices with edge differences taken
    /// from the stored increments `u(n+1) − u(n)` (current form).
    pub fn residuals(&self) -> Vec<f64> {
        let c = self.c;
        let flux = |n: usize| c.powi(n as i32 + 1) * self.step_float[n];
        (0..self.n_max())
            .map(|n| {
                let out = flux(n);
                let inward = match (n, self.variant) {
                    (0, DefectVariant::HalfLine) => 0.0,
                    (0, DefectVariant::FullLine) => -out,
                    _ => flux(n - 1),
                };
                inward - out + self.q_float[n]
            })
            .collect()
    }

    /// Float `Δu(n) + u(n)` from rounded vertex values alone; loses accuracy
    /// as `c^n` grows because neighbouring values nearly cancel.
    pub fn residuals_from_values(&self) -> Vec<f64> {
        let c = self.c;
        let u = &self.q_float;
        (0..self.n_max())
            .map(|n| {
                let right = c.powi(n as i32 + 1) * (u[n] - u[n + 1]);
                let left = match (n, self.variant) {
                    (0, DefectVariant::HalfLine) => 0.0,
                    (0, DefectVariant::FullLine) => right,
                    _ => c.powi(n as i32) * (u[n] - u[n - 1]),
                };
                left + right + u[n]
            })
            .collect()
    }

    /// Partial energies `Σ_{n=1}^{N} r^n p_n²` for `N = 1..=n_max` (doubled on
    /// the full line).
    pub fn partial_energies(&self) -> Vec<f64> {
        let r = 1.0 / self.c;
        let factor = match self.variant {
            DefectVariant::HalfLine => 1.0,
            DefectVariant::FullLine => 2.0,
        };
        let mut total = 0.0;
        (1..=self.n_max())
            .map(|n| {
                total += factor * r.powi(n as i32) * self.p_float[n] * self.p_float[n];
                total
            })
            .collect()
    }

    /// `u` laid out as on `geometric_integers(c, span = n_max, half)`.
    pub fn to_vertex_function(&self) -> VertexFunction {
        match self.variant {
            DefectVariant::HalfLine => VertexFunction::raw(self.q_float.clone()),
            DefectVariant::FullLine => {
                let s = self.n_max() as i64;
                VertexFunction::raw((-s..=s).map(|n| self.u(n)).collect())
            }
        }
    }
}

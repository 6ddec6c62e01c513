//! Sparse kernels for symmetric diagonally dominant M-matrices: an exact
//! vertex-elimination engine (factorization and Schur complements) and a
//! Jacobi-preconditioned conjugate gradient.

mod cg;
mod elimination;

pub use cg::{conjugate_gradient, CgOutcome, CsrMatrix};
pub use elimination::{EliminationGraph, LdlFactor};

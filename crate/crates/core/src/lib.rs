//! Effective resistance and related analyses on weighted graphs.
//!
//! The crate treats a finite, connected network with symmetric positive
//! conductances as the basic object. Infinite networks are handled through
//! finite truncations together with an [`ExhaustionPlan`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exhaustion;
pub mod flows;
pub mod functions;
pub mod generate;
pub mod lattice;
pub mod linalg;
pub mod network;
pub mod operators;
pub mod reduce;
pub mod resistance;
pub mod solvers;
pub mod walk;

pub use error::{Error, Result};
pub use exhaustion::{boundary_of, exhaustion, interior_of, ExhaustionPlan, ExhaustionRule};
pub use functions::{Current, Rep, VertexFunction};
pub use generate::{generate, Generated, GeneratorSpec, LatticeLayout};
pub use network::{parse_network, Edge, Network, Subnetwork};
pub use resistance::{resistance, resistance_finite, ExhaustionOptions};

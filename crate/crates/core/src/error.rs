use thiserror::Error;

/// Errors produced by network construction, solvers and analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },

    #[error("edge ({u},{v}) has non-positive conductance {value}")]
    NonPositiveConductance { u: usize, v: usize, value: f64 },

    #[error("network is disconnected: vertex {reachable} cannot reach vertex {unreachable}")]
    Disconnected { reachable: usize, unreachable: usize },

    #[error("network has no vertices")]
    EmptyNetwork,

    #[error("vertex {vertex} out of range for a network with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} is not on the boundary of the given set")]
    NotOnBoundary { vertex: usize },

    #[error("vertex {vertex} has degree {found}, expected {expected}")]
    DegreeMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },

    #[error("vertices {from} and {to} are not adjacent")]
    NotAdjacent { from: usize, to: usize },

    #[error("iterative solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

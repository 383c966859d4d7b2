//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {index}: endpoint {vertex} out of range for {n} vertices")]
    EndpointOutOfRange {
        index: usize,
        vertex: usize,
        n: usize,
    },

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex set must be nonempty")]
    EmptyVertexSet,

    #[error("target must be a nonempty proper subset of the vertices")]
    BadTarget,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has no edges")]
    NoEdges,

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("spectral gap is zero (within tolerance)")]
    ZeroGap,

    #[error("non-lazy walk is periodic (|lambda_n| = 1); use the lazy chain")]
    Periodic,

    #[error("graph too large for dense linear algebra (n = {n}, limit {limit})")]
    TooLargeForDense { n: usize, limit: usize },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolveResidual { residual: f64, tolerance: f64 },

    #[error("infeasible regular graph: n = {n}, r = {r}")]
    InfeasibleRegular { n: usize, r: usize },

    #[error("generator retry budget exhausted after {attempts} attempts (seed {seed})")]
    RetriesExhausted { seed: u64, attempts: u64 },

    #[error("invalid generator parameters: {0}")]
    InvalidFamily(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step {step} at vertex {vertex}: rule chose {chosen}, not in the blue offer list")]
    RuleViolation {
        step: u64,
        vertex: usize,
        chosen: usize,
    },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("vertex {0} has odd degree")]
    OddDegree(usize),

    #[error("graph is not regular (degrees {0} and {1} both present)")]
    NotRegular(usize, usize),

    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

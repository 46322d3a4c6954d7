use std::io;

use thiserror::Error;

use crate::graph::Vertex;

/// Failures while building, reading or generating a signed graph.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { line: usize, vertex: u64, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: Vertex },
    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: Vertex, v: Vertex },
    #[error("header announced {expected} edges but {found} were read")]
    EdgeCount { expected: usize, found: usize },
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error("clustering covers {found} vertices, graph has {expected}")]
    ClusteringSize { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Failures of the steepest-descent LP solver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("epsilon {epsilon} outside the admissible range [{lo}, {hi}] for m = {m}")]
    EpsilonOutOfRange { epsilon: f64, lo: f64, hi: f64, m: usize },
    #[error("graph is disconnected; split it into components first")]
    Disconnected,
    #[error("graph has no open triangle (complete positive component or too small)")]
    NoOpenTriangle,
    #[error("iteration guard of {guard} exceeded")]
    GuardExceeded { guard: u64 },
    #[error("potential never reached m^3/epsilon; no admissible snapshot")]
    SnapshotMissing,
}

/// Enumeration budgets of the brute-force oracles.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle budget exceeded: {0}")]
    Budget(String),
}

/// Enumeration guard of the naive eligible-triangle lister.
#[derive(Debug, Error)]
#[error("enumeration guard exceeded: m*n = {work} > {limit}")]
pub struct EnumerationGuard {
    pub work: u64,
    pub limit: u64,
}

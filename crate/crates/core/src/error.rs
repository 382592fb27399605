use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    CycleDetected,
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("parallel edge ({tail}, {head})")]
    ParallelEdge { tail: usize, head: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("source and sink must be distinct")]
    SourceIsSink,
    #[error("source {0} has incoming edges")]
    SourceHasInEdges(usize),
    #[error("sink {0} has outgoing edges")]
    SinkHasOutEdges(usize),
    #[error("no path from source to sink")]
    NoPath,
    #[error("path count exceeds cap {cap}")]
    TooManyPaths { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("coordinate {index} is not positive ({value})")]
    NonPositiveCoordinate { index: usize, value: f64 },
    #[error("optimization domain is infeasible")]
    Infeasible,
    #[error("solver stalled after {iterations} iterations (step {step:e}, tolerance {tol:e})")]
    SolverStall { iterations: usize, step: f64, tol: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("marginal of chosen coordinate {0} is zero")]
    ZeroMarginal(usize),
    #[error("sampler reached vertex {0} with no outgoing mass")]
    DeadEnd(usize),
    #[error("paths have unequal lengths ({min} to {max} edges)")]
    UnequalLengths { min: usize, max: usize },
    #[error("loss {0} outside [-1, 1]")]
    OutOfRangeLoss(f64),
    #[error("protocol violation: {0}")]
    ProtocolViolation(&'static str),
    #[error("malformed game: {0}")]
    MalformedGame(String),
    #[error("no walk of at most {0} steps reaches the sink")]
    NoWalk(usize),
    #[error("loss range violated: path weights span [{min}, {max}]")]
    RangeViolation { min: f64, max: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

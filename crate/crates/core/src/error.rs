use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("weight matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("weight matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("invalid edge weight {weight} between {row} and {col}")]
    InvalidWeight { row: usize, col: usize, weight: f64 },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("could not generate a connected graph after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("duplicate node {0} in node set")]
    DuplicateNode(usize),
    #[error("node set must not be empty")]
    EmptyNodeSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("degenerate sampling: every singular value is below the cutoff")]
    DegenerateSampling,
    #[error("rank deficient: only {chosen} of {requested} nodes have a positive increment")]
    RankDeficient { chosen: usize, requested: usize },
    #[error("linear solve failed: {0}")]
    SolveFailed(&'static str),
    #[error("could not grow {parts} connected parts")]
    PartitionFailed { parts: usize },
}

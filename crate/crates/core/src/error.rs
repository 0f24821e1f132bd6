use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("rejection budget exhausted after {0} consecutive rejections")]
    RejectionBudgetExhausted(u64),

    #[error("depth {requested} exceeds the depth cap {cap}")]
    DepthExceedsCap { requested: u32, cap: u32 },

    #[error("insufficient depth: need {needed}, tree materialized to {available}")]
    InsufficientDepth { needed: u32, available: u32 },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("subset too large for enumeration: {size} > {limit}")]
    SubsetTooLarge { size: usize, limit: usize },

    #[error("island {island} touches the frontier at vertex {vertex}")]
    ClippedIsland { island: usize, vertex: usize },

    #[error("vertex {0} is not an ocean vertex")]
    NotOcean(usize),

    #[error("empty ocean")]
    EmptyOcean,

    #[error("singular linear system: {0}")]
    SingularSolve(String),

    #[error("enumeration budget of {0} sets exceeded")]
    BudgetExceeded(u64),

    #[error("infeasible size range [{lo}, {hi}]")]
    InfeasibleSize { lo: usize, hi: usize },

    #[error("power iteration did not converge after {iters} iterations (last estimate {last})")]
    NoConvergence { iters: usize, last: f64 },

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

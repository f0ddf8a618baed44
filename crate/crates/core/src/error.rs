use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("incompatible dimensions: weights have {weights} labels, tree has {tree}")]
    IncompatibleDimensions { weights: usize, tree: usize },
    #[error("vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("enumeration bound exceeded: n = {n} > {max}")]
    EnumerationBoundExceeded { n: usize, max: usize },
    #[error("walk did not cover support after {0} steps")]
    WalkDidNotCover(u64),
    #[error("empty target set")]
    EmptyTargets,
    #[error("mark {mark} outside admissible subtree of backbone vertex {successor}")]
    MarkOutsideSubtree { successor: usize, mark: usize },
    #[error("missing mark for backbone vertex {0}")]
    MissingMark(usize),
    #[error("parameter outside supported class: {0}")]
    UnsupportedParameter(String),
    #[error("infeasible discretisation: n = {n} too small, need n >= {min_n}")]
    InfeasibleSize { n: usize, min_n: usize },
    #[error("leaf {0} is not marked")]
    UnmarkedLeaf(usize),
    #[error("degenerate statistics input: {0}")]
    Degenerate(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

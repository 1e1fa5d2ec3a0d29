use std::path::PathBuf;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("self-loop on node {node} (edge #{position})")]
    SelfLoop { node: usize, position: usize },
    #[error("duplicate edge ({u}, {v}) at position {position}")]
    DuplicateEdge { u: usize, v: usize, position: usize },
    #[error("edge ({u}, {v}) at position {position} references a node >= {num_nodes}")]
    IndexOutOfRange {
        u: usize,
        v: usize,
        position: usize,
        num_nodes: usize,
    },
    #[error("feature row {row}: {reason}")]
    FeatureShapeMismatch { row: usize, reason: String },
    #[error("cyclomatic number {cyclomatic} exceeds the cycle-count guard of {limit}")]
    TooManyCycles { cyclomatic: usize, limit: usize },
    #[error("graph is empty")]
    EmptyGraph,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("explanation mask references edge {edge} but the graph has {num_edges} edges")]
    InvalidMask { edge: usize, num_edges: usize },
    #[error("requested {requested} explanation edges but the graph has {available}")]
    SizeTooLarge { requested: usize, available: usize },
    #[error("graph has no node features")]
    NoFeatures,
    #[error("feature width mismatch: {left} vs {right}")]
    FeatureDimMismatch { left: usize, right: usize },
    #[error("mixup requires a donor graph")]
    NoMixupDonor,
    #[error("embedding {index} has zero norm")]
    ZeroNormEmbedding { index: usize },
    #[error("embedding lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding contains a non-finite value")]
    NonFiniteEmbedding,
    #[error("{items} items exceed the exhaustive partition limit of {limit}")]
    TooManyItems { items: usize, limit: usize },
    #[error("{count} vectors do not fit in dimension {dim} (need count <= dim + 1)")]
    DimensionTooSmall { count: usize, dim: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("augmented pair set is empty")]
    EmptyPairSet,
    #[error("augmented graph has {0} simple cycles; expected 0, 1 or 3")]
    UnexpectedCycleCount(u64),
    #[error("no input rows")]
    EmptyInput,
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("sons of vertex {vertex} overlap at index {index}")]
    OverlappingSons { vertex: String, index: usize },

    #[error("sons do not cover the parent: expected {expected}, found {found}")]
    IncompleteUnion { expected: String, found: String },

    #[error("interior vertex {vertex} has a single son")]
    SingleSon { vertex: String },

    #[error("leaf {leaf} is not a singleton")]
    NonSingletonLeaf { leaf: String },

    #[error("mode index {index} out of range 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("invalid mode count {0}: at least 2 modes are required")]
    InvalidModeCount(usize),

    #[error("invalid vertex: {0}")]
    InvalidVertex(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("functional mode sets do not partition the complement: {0}")]
    PartitionViolation(String),

    #[error("malformed rank tuple: {0}")]
    MalformedRanks(String),

    #[error("rank constraint violated at vertex {vertex}: {constraint}")]
    RankViolation { vertex: String, constraint: String },

    #[error("operation undefined for the zero tensor")]
    ZeroTensor,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind, used in structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::OverlappingSons { .. } => "OverlappingSons",
            Error::IncompleteUnion { .. } => "IncompleteUnion",
            Error::SingleSon { .. } => "SingleSon",
            Error::NonSingletonLeaf { .. } => "NonSingletonLeaf",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidModeCount(_) => "InvalidModeCount",
            Error::InvalidVertex(_) => "InvalidVertex",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::PartitionViolation(_) => "PartitionViolation",
            Error::MalformedRanks(_) => "MalformedRanks",
            Error::RankViolation { .. } => "RankViolation",
            Error::ZeroTensor => "ZeroTensor",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Json(_) => "JsonError",
        }
    }

    /// The vertex a diagnostic refers to, when there is one.
    pub fn vertex(&self) -> Option<&str> {
        match self {
            Error::OverlappingSons { vertex, .. }
            | Error::SingleSon { vertex }
            | Error::RankViolation { vertex, .. } => Some(vertex),
            Error::NonSingletonLeaf { leaf } => Some(leaf),
            _ => None,
        }
    }
}

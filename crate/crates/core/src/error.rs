use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} outside supported range 1..={max}", max = crate::topology::MAX_DIMENSION)]
    InvalidDimension(u32),

    #[error("node {node} is not an address of a {dimension}-cube")]
    NodeOutOfRange { node: NodeId, dimension: u32 },

    #[error("dimension index {index} out of range for a {dimension}-cube")]
    DimensionIndexOutOfRange { index: u32, dimension: u32 },

    #[error("cannot place {requested} faults: only {available} eligible nodes")]
    InfeasibleFaultCount { requested: usize, available: usize },

    #[error("endpoint {0} is faulty")]
    FaultyEndpoint(NodeId),

    #[error("no admissible candidate")]
    EmptyCandidateSet,

    #[error("expected {expected} costs, got {actual}")]
    CostLength { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("case {index}: {source}")]
    Case {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

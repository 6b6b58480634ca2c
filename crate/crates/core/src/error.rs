use thiserror::Error;

use crate::graph_store::ObjectAddress;
use crate::topology::Coord;
use crate::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("operon already at its destination {0}")]
    AlreadyDelivered(Coord),
    #[error("cell {0} is outside the grid")]
    OutsideGrid(Coord),
    #[error("staging buffer of cell {0} is full")]
    Backpressure(Coord),
    #[error(
        "cell {cell} is out of memory ({used} of {capacity} bytes used, need {requested} more)"
    )]
    OutOfMemory {
        cell: Coord,
        used: u64,
        capacity: u64,
        requested: u64,
    },
    #[error("vertex {0} already has a root object")]
    DuplicateVertex(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("no object at {0}")]
    BadAddress(ObjectAddress),
    #[error("object {0} is not a root vertex object")]
    NotRoot(ObjectAddress),
    #[error("flit decode failed: {0}")]
    Decode(String),
    #[error("non-termination guard hit after {cycles} cycles\n{dump}")]
    NonTermination { cycles: u64, dump: String },
}

impl SimError {
    pub fn is_oom(&self) -> bool {
        matches!(self, SimError::OutOfMemory { .. })
    }
}

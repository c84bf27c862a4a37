use thiserror::Error;

use crate::model::{EdgeId, ValidationReport, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {edge} does not leave vertex {vertex}")]
    EdgeNotFrom { edge: EdgeId, vertex: VertexId },
    #[error("no directed path from {start} to {dest}")]
    NoPath { start: VertexId, dest: VertexId },
    #[error("knowledge contradicts the world on edge {0}")]
    InconsistentKnowledge(EdgeId),
    #[error("knowledge lacks the status of sighted edge {0}")]
    NotMaximallyRestrictive(EdgeId),
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("tiebreak over an empty candidate set")]
    EmptyCandidates,
    #[error("instance has {edges} edges, above the enumeration cap of {cap}")]
    TooManyEdges { edges: usize, cap: usize },
    #[error("policy chose edge {0}, which it already knows is down")]
    PolicyChoseKnownDown(EdgeId),
    #[error("invalid probability {0:?}: {1}")]
    BadProbability(String, String),
    #[error("malformed edge key {0:?}, expected \"tail-head\"")]
    BadEdgeKey(String),
    #[error("cache capacity must be at least 1")]
    ZeroCapacity,
    #[error("generator gave up after {0} rejected attempts")]
    GeneratorExhausted(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use crate::model::{LinkId, NodeId, StreamId};
use crate::verify::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty period set")]
    EmptyPeriods,
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("link rate must be positive")]
    ZeroRate,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("unknown stream {0}")]
    UnknownStream(StreamId),
    #[error("stream {0} is already admitted")]
    AlreadyAdmitted(StreamId),
    #[error("duplicate stream id {0} in request batch")]
    DuplicateStream(StreamId),
    #[error("invalid stream {id}: {reason}")]
    InvalidStream { id: StreamId, reason: String },
    #[error("no route from {src} to {dst}")]
    NoRoute { src: NodeId, dst: NodeId },
    #[error("no candidate routes for stream {0}")]
    MissingCandidates(StreamId),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("graph still disconnected after {0} attempts")]
    Disconnected(usize),
    #[error("alpha = {alpha} violates bound: {reason}")]
    AlphaBound { alpha: u64, reason: String },
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("schedule has {} violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Validation(Vec<Violation>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

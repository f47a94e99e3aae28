use thiserror::Error;

use crate::data::{ElementId, Triple};
use crate::symbol::Symbol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("symbol text is empty")]
    EmptySymbol,
    #[error("`{0}` belongs to the innate vocabulary and cannot be interned as a user atom")]
    VocabularyCollision(String),
    #[error("`{0}` is not part of the innate vocabulary")]
    NotInnate(String),
    #[error("chunk elements name different nodes: `{0}` and `{1}`")]
    HeterogeneousNodes(Symbol, Symbol),
    #[error("a chunk needs at least one element")]
    EmptyChunk,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WmError {
    #[error("element {0} lies outside every buffer")]
    Placement(Triple),
    #[error("rule actions may not write module status: {0}")]
    WallViolation(Triple),
    #[error("unknown element id {0}")]
    UnknownElement(ElementId),
    #[error("operation requires {0} mode")]
    UnsupportedMode(&'static str),
    #[error("the top state cannot be removed")]
    CannotRemoveTop,
    #[error("`{0}` is not an active substate")]
    NotASubstate(Symbol),
    #[error("unknown buffer `{0}`")]
    UnknownBuffer(Symbol),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcError {
    #[error("elaboration did not reach a fixpoint within {0} waves")]
    RunawayElaboration(usize),
    #[error(transparent)]
    Wm(#[from] WmError),
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checksum mismatch (expected {expected}, found {found})")]
    Checksum { expected: String, found: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported snapshot header `{0}`")]
    Header(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("the runtime has halted")]
    Halted,
    #[error(transparent)]
    Procedural(#[from] ProcError),
    #[error(transparent)]
    Wm(#[from] WmError),
    #[error("no scripted environment response for motor command `{0}`")]
    UnknownEnvironmentResponse(String),
    #[error("substate stack exceeded {0} levels")]
    SubstateDepth(usize),
    #[error("model has {0} error diagnostic(s)")]
    InvalidModel(usize),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

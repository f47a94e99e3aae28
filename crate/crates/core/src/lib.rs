//! A kernel for rule-based cognitive models that runs in one of two modes:
//! buffer-based (ACT-R style) or state-graph based (Soar style).

pub mod activation;
pub mod config;
pub mod data;
pub mod declarative;
pub mod dsl;
pub mod error;
pub mod learning;
pub mod procedural;
pub mod runtime;
pub mod symbol;
pub mod wm;

pub use data::{Chunk, Element, ElementId, InstId, Ms, Triple, Value};
pub use error::{DataError, ProcError, RunError, SnapshotError, WmError};
pub use symbol::{Symbol, SymbolKind, SymbolTable};
pub use wm::{Mode, WorkingMemory};
pub use runtime::{Runtime, RunSummary, StopReason, TraceRecord};

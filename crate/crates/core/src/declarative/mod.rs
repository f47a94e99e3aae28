//! Long-term declarative memory: the semantic store with activation-based
//! retrieval, and the episodic store.

pub mod episodic;
pub mod retrieval;
pub mod semantic;
pub mod snapshot;
pub mod spread;

pub use episodic::{Direction, EmEvent, Episode, EpisodicStore};
pub use retrieval::{blend, latency, retrieve, score_candidates, spontaneous, Cue, RetrievalOutcome, RetrievalParams};
pub use semantic::{SemanticStore, Slots, StoreCause, StoredChunk};
pub use spread::{fan_strength, spread_actr, spread_soar, HOP_DECAY};

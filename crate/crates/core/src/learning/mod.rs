//! Procedural learning: utility updates from reward, production
//! compilation, chunking, and forgetting of learned rules.

pub mod chunking;
pub mod compile;
pub mod forgetting;
pub mod td;

pub use chunking::{chunk_substate, preference_is_result, ChunkRefused, ChunkResult, SubstateTrace};
pub use compile::{canonical, compile_pair, NotCompilable};
pub use forgetting::forget_rules;
pub use td::{
    absorb_duplicate, td_target, td_toward, update_rl_soar, update_utilities_actr, RewardEvent,
    RewardSource, UtilityDelta, UtilityParams,
};

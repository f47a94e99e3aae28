//! The event queue that drives simulated time.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::data::{InstId, Ms, Value};
use crate::declarative::semantic::StoredChunk;
use crate::dsl::ChunkDecl;
use crate::symbol::Symbol;

/// What a module delivers when its request completes.
#[derive(Debug, Clone, PartialEq)]
pub enum ModuleResult {
    /// A chunk for the buffer's `retrieved` field; extra chunks come along
    /// when a named retrieval asked for depth.
    Chunk { root: StoredChunk, extra: Vec<StoredChunk> },
    /// A synthesized chunk (blending, episodic reconstruction).
    Built { name: Symbol, slots: Vec<(Symbol, Value)>, extra: Vec<(Symbol, Vec<(Symbol, Value)>)> },
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    CycleStart,
    /// `token` identifies the request; a newer request on the same buffer
    /// makes older completions stale.
    RetrievalComplete { buffer: Symbol, result: ModuleResult, request: InstId, token: u64 },
    MotorComplete { buffer: Symbol, command: String, success: bool, percept: Option<ChunkDecl> },
    PerceptArrival { chunk: ChunkDecl },
    Reward { amount: f64 },
    Halt,
}

impl EventKind {
    pub fn word(&self) -> &'static str {
        match self {
            EventKind::CycleStart => "cycle-start",
            EventKind::RetrievalComplete { .. } => "retrieval-complete",
            EventKind::MotorComplete { .. } => "motor-complete",
            EventKind::PerceptArrival { .. } => "percept-arrival",
            EventKind::Reward { .. } => "reward",
            EventKind::Halt => "halt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledEvent {
    pub at: Ms,
    pub seq: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
struct Queued(ScheduledEvent);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.0.at, self.0.seq) == (other.0.at, other.0.seq)
    }
}
impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.at, self.0.seq).cmp(&(other.0.at, other.0.seq))
    }
}

/// Events come out in `(at, seq)` order; `seq` is assigned on insertion.
#[derive(Debug, Clone, Default)]
pub struct Schedule {
    heap: BinaryHeap<Reverse<Queued>>,
    next_seq: u64,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, at: Ms, kind: EventKind) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Queued(ScheduledEvent { at, seq, kind })));
        seq
    }

    pub fn pop(&mut self) -> Option<ScheduledEvent> {
        self.heap.pop().map(|Reverse(q)| q.0)
    }

    pub fn peek_time(&self) -> Option<Ms> {
        self.heap.peek().map(|Reverse(q)| q.0.at)
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    /// Pending events in execution order.
    pub fn pending(&self) -> Vec<&ScheduledEvent> {
        let mut out: Vec<&ScheduledEvent> = self.heap.iter().map(|Reverse(q)| &q.0).collect();
        out.sort_by_key(|e| (e.at, e.seq));
        out
    }
}

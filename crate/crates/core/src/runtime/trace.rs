//! Trace records: one per step, written as JSON Lines.
//!
//! Struct fields are declared in alphabetical order and every map is a
//! `BTreeMap`, so the serialized key order is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Ms, Triple};
use crate::wm::{WmDelta, WorkingMemory, CHUNK_FIELDS};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BufferView {
    /// Chunk-holding field -> chunk name.
    pub fields: BTreeMap<String, String>,
    /// The buffer's own slots as `edge value`, sorted.
    pub slots: Vec<String>,
    pub status: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Firing {
    pub bindings: BTreeMap<String, String>,
    pub production: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImpasseEvent {
    pub candidates: Vec<String>,
    /// `created` or `resolved`.
    pub event: String,
    pub kind: String,
    pub state: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningEvent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before: Option<f64>,
    /// `utility`, `compiled`, `recompiled`, `chunked`, `chunk-refused` or `forgotten`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<String>,
    pub rule: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalEvent {
    pub buffer: String,
    /// `request` or `complete`.
    pub event: String,
    /// The command, or `spontaneous`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<Ms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeltaView {
    pub added: Vec<String>,
    pub removed: Vec<String>,
}

impl DeltaView {
    pub fn from_delta(d: &WmDelta) -> DeltaView {
        DeltaView {
            added: d.added.iter().map(Triple::to_string).collect(),
            removed: d.removed.iter().map(Triple::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub buffers: BTreeMap<String, BufferView>,
    pub cycle: u64,
    pub fired: Vec<Firing>,
    pub impasses: Vec<ImpasseEvent>,
    pub learning: Vec<LearningEvent>,
    /// `init`, `cycle`, `halt` or `quiescent`.
    pub phase: String,
    pub retrievals: Vec<RetrievalEvent>,
    pub time_ms: Ms,
    pub wm_delta: DeltaView,
}

impl TraceRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace records always serialize")
    }
}

pub fn buffer_views(wm: &WorkingMemory) -> BTreeMap<String, BufferView> {
    let mut out = BTreeMap::new();
    for b in wm.buffers() {
        let mut view = BufferView {
            status: wm.status(b).map(|s| s.state().word().to_string()).unwrap_or_default(),
            ..Default::default()
        };
        for f in CHUNK_FIELDS {
            if let Some(t) = wm.field_target(b, f) {
                view.fields.insert(f.to_string(), t.to_string());
            }
        }
        if let Some(c) = wm.payload_chunk(b) {
            view.slots = c.slots().iter().map(|(e, v)| format!("{e} {v}")).collect();
            view.slots.sort();
        }
        out.insert(b.to_string(), view);
    }
    out
}

/// Writes records as JSON Lines.
pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json());
        out.push('\n');
    }
    out
}

/// Reads JSON Lines back; blank lines are skipped.
pub fn from_jsonl(text: &str) -> Result<Vec<TraceRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// Working memory after the record for `cycle`, rebuilt by replaying the
/// deltas from the start of the trace. `None` if no record has that cycle.
pub fn replay_to(records: &[TraceRecord], cycle: u64) -> Option<(std::collections::BTreeSet<String>, &TraceRecord)> {
    let last = records.iter().rposition(|r| r.cycle == cycle)?;
    let mut wm = std::collections::BTreeSet::new();
    for r in &records[..=last] {
        for t in &r.wm_delta.removed {
            wm.remove(t);
        }
        for t in &r.wm_delta.added {
            wm.insert(t.clone());
        }
    }
    Some((wm, &records[last]))
}

//! The semantic store: named chunks with their access history, plus
//! co-occurrence history between chunks.

use std::collections::{BTreeMap, BTreeSet};

use crate::activation::bla;
use crate::data::{Ms, Value};
use crate::error::DataError;
use crate::symbol::Symbol;
use crate::wm::Mode;

pub type Slots = Vec<(Symbol, Value)>;

#[derive(Debug, Clone, PartialEq)]
pub struct StoredChunk {
    pub name: Symbol,
    /// Sorted by edge then value.
    pub slots: Slots,
    pub accesses: Vec<Ms>,
    pub last_retrieved: Option<Ms>,
    /// Per-slot access history, kept in Soar mode when the working-memory
    /// copy of a slot is tested or created.
    pub slot_accesses: BTreeMap<(Symbol, Value), Vec<Ms>>,
}

impl StoredChunk {
    pub fn get(&self, edge: &str) -> Option<&Value> {
        self.slots.iter().find(|(e, _)| e.as_str() == edge).map(|(_, v)| v)
    }

    /// Symbol values of this chunk, the targets of its outgoing links.
    pub fn symbol_values(&self) -> impl Iterator<Item = &Symbol> {
        self.slots.iter().filter_map(|(_, v)| v.as_symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreCause {
    BufferCleared,
    ExplicitCommand,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SemanticStore {
    chunks: BTreeMap<Symbol, StoredChunk>,
    by_content: BTreeMap<Slots, Symbol>,
    /// (source, target) -> times the two were seen together.
    associations: BTreeMap<(Symbol, Symbol), Vec<Ms>>,
}

fn normalize(mut slots: Slots) -> Slots {
    slots.sort();
    slots.dedup();
    slots
}

impl SemanticStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn get(&self, name: &Symbol) -> Option<&StoredChunk> {
        self.chunks.get(name)
    }

    /// Chunks in name order.
    pub fn chunks(&self) -> impl Iterator<Item = &StoredChunk> {
        self.chunks.values()
    }

    pub fn associations(&self) -> &BTreeMap<(Symbol, Symbol), Vec<Ms>> {
        &self.associations
    }

    /// Stores a chunk. Identical content merges into the existing chunk as
    /// one more access. A name already used by different content gets a
    /// numeric suffix. Soar mode stores only on explicit command; a
    /// cleared buffer there stores nothing and `Ok(None)` is returned.
    pub fn store_chunk(
        &mut self,
        mode: Mode,
        name: &Symbol,
        slots: Slots,
        now: Ms,
        cause: StoreCause,
    ) -> Result<Option<Symbol>, DataError> {
        if slots.is_empty() {
            return Err(DataError::EmptyChunk);
        }
        if mode == Mode::Soar && cause == StoreCause::BufferCleared {
            return Ok(None);
        }
        let slots = normalize(slots);
        if let Some(existing) = self.by_content.get(&slots) {
            let existing = existing.clone();
            self.chunks.get_mut(&existing).expect("indexed chunk").accesses.push(now);
            return Ok(Some(existing));
        }
        let base = name.clone();
        let mut name = name.clone();
        let mut n = 1;
        while self.chunks.contains_key(&name) {
            n += 1;
            name = Symbol::named(&format!("{base}-{n}"));
        }
        self.insert(StoredChunk {
            name: name.clone(),
            slots,
            accesses: vec![now],
            last_retrieved: None,
            slot_accesses: BTreeMap::new(),
        });
        Ok(Some(name))
    }

    /// Inserts a chunk as is, replacing any chunk of the same name.
    pub(crate) fn insert(&mut self, chunk: StoredChunk) {
        if let Some(old) = self.chunks.remove(&chunk.name) {
            self.by_content.remove(&old.slots);
        }
        self.by_content.insert(chunk.slots.clone(), chunk.name.clone());
        self.chunks.insert(chunk.name.clone(), chunk);
    }

    pub(crate) fn set_association(&mut self, source: Symbol, target: Symbol, history: Vec<Ms>) {
        self.associations.insert((source, target), history);
    }

    /// Records a retrieval: one more access and the retrieval time.
    pub(crate) fn mark_retrieved(&mut self, name: &Symbol, now: Ms) {
        if let Some(c) = self.chunks.get_mut(name) {
            c.accesses.push(now);
            c.last_retrieved = Some(now);
        }
    }

    /// Fetches a chunk by name, stamping an access. With `depth > 0` the
    /// chunks its values name are fetched too, recursively, each once.
    pub fn retrieve_by_name(&mut self, name: &Symbol, depth: u32, now: Ms) -> Option<Vec<StoredChunk>> {
        if !self.chunks.contains_key(name) {
            return None;
        }
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut frontier = vec![name.clone()];
        for level in 0..=depth {
            let mut next = Vec::new();
            for n in frontier {
                if !seen.insert(n.clone()) {
                    continue;
                }
                let Some(c) = self.chunks.get_mut(&n) else { continue };
                c.accesses.push(now);
                if level == 0 {
                    c.last_retrieved = Some(now);
                }
                next.extend(c.symbol_values().cloned());
                out.push(c.clone());
            }
            frontier = next;
        }
        Some(out)
    }

    /// Notes an access to one slot of a stored chunk.
    pub fn touch_slot(&mut self, name: &Symbol, edge: &Symbol, value: &Value, now: Ms) {
        if let Some(c) = self.chunks.get_mut(name) {
            if c.slots.iter().any(|(e, v)| e == edge && v == value) {
                c.slot_accesses.entry((edge.clone(), value.clone())).or_default().push(now);
            }
        }
    }

    /// Notes that `target` was retrieved while `sources` were in context.
    pub fn record_cooccurrence(&mut self, sources: &BTreeSet<Symbol>, target: &Symbol, now: Ms) {
        for s in sources {
            if s != target {
                self.associations.entry((s.clone(), target.clone())).or_default().push(now);
            }
        }
    }

    /// Strength of the learned association, using the same power-law form
    /// as base-level activation over the co-occurrence history.
    pub fn association_strength(&self, source: &Symbol, target: &Symbol, now: Ms, decay: f64) -> f64 {
        self.associations
            .get(&(source.clone(), target.clone()))
            .map(|h| bla(h, now, decay))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Number of stored chunks that have `j` as a value.
    pub fn fan(&self, j: &Symbol) -> usize {
        self.chunks.values().filter(|c| c.symbol_values().any(|v| v == j)).count()
    }

    pub fn base_level(&self, name: &Symbol, now: Ms, decay: f64) -> f64 {
        self.chunks.get(name).map(|c| bla(&c.accesses, now, decay)).unwrap_or(f64::NEG_INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Symbol {
        Symbol::named(x)
    }

    fn slots(pairs: &[(&str, &str)]) -> Slots {
        pairs.iter().map(|(e, v)| (s(e), Value::sym(v))).collect()
    }

    #[test]
    fn merge_identical_content() {
        let mut sm = SemanticStore::new();
        let a = sm.store_chunk(Mode::Actr, &s("f1"), slots(&[("first", "one")]), 10, StoreCause::BufferCleared).unwrap();
        let b = sm.store_chunk(Mode::Actr, &s("g9"), slots(&[("first", "one")]), 20, StoreCause::BufferCleared).unwrap();
        assert_eq!(a, b);
        assert_eq!(sm.len(), 1);
        assert_eq!(sm.get(&s("f1")).unwrap().accesses, vec![10, 20]);
    }

    #[test]
    fn name_collision_gets_suffix() {
        let mut sm = SemanticStore::new();
        sm.store_chunk(Mode::Actr, &s("f"), slots(&[("a", "1")]), 0, StoreCause::ExplicitCommand).unwrap();
        let b = sm.store_chunk(Mode::Actr, &s("f"), slots(&[("a", "2")]), 0, StoreCause::ExplicitCommand).unwrap();
        let c = sm.store_chunk(Mode::Actr, &s("f"), slots(&[("a", "3")]), 0, StoreCause::ExplicitCommand).unwrap();
        assert_eq!(b, Some(s("f-2")));
        assert_eq!(c, Some(s("f-3")));
    }

    #[test]
    fn soar_needs_explicit_store() {
        let mut sm = SemanticStore::new();
        let r = sm.store_chunk(Mode::Soar, &s("f"), slots(&[("a", "1")]), 0, StoreCause::BufferCleared).unwrap();
        assert_eq!(r, None);
        assert!(sm.is_empty());
        assert!(sm.store_chunk(Mode::Soar, &s("f"), vec![], 0, StoreCause::ExplicitCommand).is_err());
    }

    #[test]
    fn by_name() {
        let mut sm = SemanticStore::new();
        sm.store_chunk(Mode::Soar, &s("n1"), slots(&[("color", "red")]), 0, StoreCause::ExplicitCommand).unwrap();
        let got = sm.retrieve_by_name(&s("n1"), 0, 100).unwrap();
        assert_eq!(got[0].slots, slots(&[("color", "red")]));
        sm.retrieve_by_name(&s("n1"), 0, 200).unwrap();
        assert_eq!(sm.get(&s("n1")).unwrap().accesses, vec![0, 100, 200]);
        assert!(sm.retrieve_by_name(&s("zz"), 0, 100).is_none());
    }

    #[test]
    fn children_to_depth() {
        let mut sm = SemanticStore::new();
        let st = StoreCause::ExplicitCommand;
        sm.store_chunk(Mode::Soar, &s("a"), vec![(s("next"), Value::node("b"))], 0, st).unwrap();
        sm.store_chunk(Mode::Soar, &s("b"), vec![(s("next"), Value::node("c"))], 0, st).unwrap();
        sm.store_chunk(Mode::Soar, &s("c"), slots(&[("end", "yes")]), 0, st).unwrap();
        assert_eq!(sm.retrieve_by_name(&s("a"), 0, 5).unwrap().len(), 1);
        assert_eq!(sm.retrieve_by_name(&s("a"), 1, 5).unwrap().len(), 2);
        assert_eq!(sm.retrieve_by_name(&s("a"), 5, 5).unwrap().len(), 3);
    }
}

//! Working memory: the current-situation graph, buffers, substates and the
//! per-element metadata the architecture keeps about them.
//!
//! Two disciplines share this type. In ACT-R mode every element must live in
//! a buffer: either on the buffer node itself (the buffer's own slots) or on
//! a chunk the buffer points to through one of its chunk-holding fields. In
//! Soar mode the memory is a graph rooted in the top state and any
//! substates; anything not linked to a state is collected at the end of the
//! cycle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::activation::bla;
use crate::data::{
    node_levels, Chunk, Derivation, Element, ElementId, InstId, ModuleStatus, Ms, StatusState,
    Triple, Value,
};
use crate::error::WmError;
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Actr,
    Soar,
}

impl Mode {
    pub fn word(self) -> &'static str {
        match self {
            Mode::Actr => "actr",
            Mode::Soar => "soar",
        }
    }
}

/// Buffer fields that hold a pointer to a chunk.
pub const CHUNK_FIELDS: [&str; 4] = ["percept", "retrieved", "cue", "payload"];

/// Where an element came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Rule(InstId),
    Retrieval { cue: Vec<ElementId>, request: Option<InstId> },
    Percept,
    Architecture,
}

/// Coarse classification kept for every element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementClass {
    /// Created by a rule action.
    Rule,
    /// Delivered by a declarative or episodic retrieval.
    Retrieval,
    Percept,
    /// Substate bookkeeping, buffer links and similar.
    Architecture,
    /// Module status; no metadata is kept for these.
    Status,
}

/// Metadata the architecture keeps per element.
#[derive(Debug, Clone, PartialEq)]
pub struct WmMeta {
    pub created_at: Ms,
    pub accesses: Vec<Ms>,
    pub derivation: Option<Derivation>,
    pub copy_of: Option<Symbol>,
    /// Created by operator application or by the architecture; survives
    /// the loss of its justifications.
    pub persistent: bool,
    pub justifications: BTreeSet<InstId>,
}

#[derive(Debug, Clone)]
struct Slot {
    element: Element,
    class: ElementClass,
    meta: Option<WmMeta>,
}

/// A state on the goal stack.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFrame {
    pub node: Symbol,
    /// `None` for the top state.
    pub impasse: Option<Symbol>,
    pub candidates: Vec<Symbol>,
    /// Every element with an id at or above this one was created while
    /// this state existed.
    pub watermark: ElementId,
    pub created_at: Ms,
}

/// Elements added and removed over some span, as sorted triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmDelta {
    pub added: Vec<Triple>,
    pub removed: Vec<Triple>,
}

impl WmDelta {
    pub fn between(before: &BTreeSet<Triple>, after: &BTreeSet<Triple>) -> WmDelta {
        WmDelta {
            added: after.difference(before).cloned().collect(),
            removed: before.difference(after).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct WorkingMemory {
    mode: Mode,
    slots: BTreeMap<ElementId, Slot>,
    by_triple: HashMap<Triple, ElementId>,
    by_node: HashMap<Symbol, BTreeSet<ElementId>>,
    justified: BTreeMap<InstId, BTreeSet<ElementId>>,
    buffers: Vec<Symbol>,
    statuses: BTreeMap<Symbol, (ModuleStatus, ElementId)>,
    states: Vec<StateFrame>,
    next_id: u64,
    substate_counter: u64,
    decay: Option<f64>,
}

fn status_edge() -> Symbol {
    Symbol::raw("status")
}

impl WorkingMemory {
    /// Creates working memory with the declared buffers. In Soar mode the
    /// top state is created and every buffer node is linked from it.
    pub fn new(mode: Mode, buffers: Vec<Symbol>, top_state: Symbol, now: Ms) -> WorkingMemory {
        let mut wm = WorkingMemory {
            mode,
            slots: BTreeMap::new(),
            by_triple: HashMap::new(),
            by_node: HashMap::new(),
            justified: BTreeMap::new(),
            buffers: Vec::new(),
            statuses: BTreeMap::new(),
            states: Vec::new(),
            next_id: 1,
            substate_counter: 1,
            decay: None,
        };
        let mut seen = BTreeSet::new();
        for b in buffers {
            if seen.insert(b.clone()) {
                wm.buffers.push(b);
            }
        }
        if mode == Mode::Soar {
            wm.states.push(StateFrame {
                node: top_state.clone(),
                impasse: None,
                candidates: Vec::new(),
                watermark: ElementId(1),
                created_at: now,
            });
            for b in wm.buffers.clone() {
                wm.insert(
                    Triple::new(top_state.clone(), b.clone(), Value::Node(b.clone())),
                    ElementClass::Architecture,
                    None,
                    now,
                );
            }
        }
        for b in wm.buffers.clone() {
            wm.set_status(&b, StatusState::Free, None)
                .expect("declared buffer");
        }
        wm
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Enables activation-based forgetting with the given decay.
    pub fn set_decay(&mut self, decay: Option<f64>) {
        self.decay = decay;
    }

    pub fn buffers(&self) -> &[Symbol] {
        &self.buffers
    }

    pub fn is_buffer(&self, s: &Symbol) -> bool {
        self.buffers.contains(s)
    }

    pub fn states(&self) -> &[StateFrame] {
        &self.states
    }

    pub fn top_state(&self) -> Option<&Symbol> {
        self.states.first().map(|f| &f.node)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// The id the next created element will receive.
    pub fn next_id(&self) -> ElementId {
        ElementId(self.next_id)
    }

    // ------------------------------------------------------------------
    // Queries
    // ------------------------------------------------------------------

    pub fn get(&self, id: ElementId) -> Option<&Element> {
        self.slots.get(&id).map(|s| &s.element)
    }

    pub fn class(&self, id: ElementId) -> Option<ElementClass> {
        self.slots.get(&id).map(|s| s.class)
    }

    pub fn meta(&self, id: ElementId) -> Option<&WmMeta> {
        self.slots.get(&id).and_then(|s| s.meta.as_ref())
    }

    pub fn find(&self, triple: &Triple) -> Option<ElementId> {
        self.by_triple.get(triple).copied()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.by_triple.contains_key(triple)
    }

    /// Elements in id order.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.slots.values().map(|s| &s.element)
    }

    /// Ids of elements on `node`, in id order.
    pub fn on_node(&self, node: &Symbol) -> Vec<ElementId> {
        self.by_node
            .get(node)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn triples(&self) -> BTreeSet<Triple> {
        self.slots.values().map(|s| s.element.triple.clone()).collect()
    }

    pub fn status(&self, buffer: &Symbol) -> Option<&ModuleStatus> {
        self.statuses.get(buffer).map(|(s, _)| s)
    }

    pub fn statuses(&self) -> impl Iterator<Item = &ModuleStatus> {
        self.statuses.values().map(|(s, _)| s)
    }

    /// Node a chunk-holding field of `buffer` points at.
    pub fn field_target(&self, buffer: &Symbol, field: &str) -> Option<Symbol> {
        self.on_node(buffer).into_iter().find_map(|id| {
            let t = &self.slots[&id].element.triple;
            (t.edge.as_str() == field).then(|| t.value.as_node().cloned()).flatten()
        })
    }

    /// The chunk made of every element on `node`.
    pub fn chunk(&self, node: &Symbol) -> Option<Chunk> {
        let elements: Vec<Element> = self
            .on_node(node)
            .into_iter()
            .map(|id| self.slots[&id].element.clone())
            .collect();
        Chunk::assemble(elements).ok()
    }

    /// The buffer's own slots: elements on the buffer node whose edge is not
    /// one of the six field names.
    pub fn payload_chunk(&self, buffer: &Symbol) -> Option<Chunk> {
        let elements: Vec<Element> = self
            .on_node(buffer)
            .into_iter()
            .map(|id| self.slots[&id].element.clone())
            .filter(|e| !crate::symbol::FIELD_WORDS.contains(&e.triple.edge.as_str()))
            .collect();
        Chunk::assemble(elements).ok()
    }

    /// Node -> index of the shallowest state linking it (Soar mode).
    pub fn levels(&self) -> BTreeMap<Symbol, usize> {
        let roots: Vec<Symbol> = self.states.iter().map(|f| f.node.clone()).collect();
        node_levels(self.slots.values().map(|s| &s.element.triple), &roots)
    }

    /// Substate level of an element: the shallowest state it is linked from.
    pub fn element_level(&self, id: ElementId) -> Option<usize> {
        let node = &self.slots.get(&id)?.element.triple.node;
        self.levels().get(node).copied()
    }

    /// Canonical dump: one triple per line, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in self.triples() {
            let _ = writeln!(out, "{t}");
        }
        out
    }

    /// Agent data reachable from the top state, excluding buffers, module
    /// status and operator structures. This is what episodic memory records.
    pub fn top_state_snapshot(&self) -> BTreeSet<Triple> {
        let mut out = BTreeSet::new();
        let Some(top) = self.top_state().cloned() else {
            return out;
        };
        let operator_nodes: BTreeSet<Symbol> = self
            .on_node(&top)
            .into_iter()
            .filter_map(|id| {
                let t = &self.slots[&id].element.triple;
                matches!(t.edge.as_str(), "operator" | "selected")
                    .then(|| t.value.as_node().cloned())
                    .flatten()
            })
            .collect();
        let mut seen: BTreeSet<Symbol> = BTreeSet::from([top.clone()]);
        let mut stack = vec![top];
        while let Some(n) = stack.pop() {
            for id in self.on_node(&n) {
                let slot = &self.slots[&id];
                if slot.class == ElementClass::Status {
                    continue;
                }
                let t = &slot.element.triple;
                if matches!(t.edge.as_str(), "operator" | "selected") {
                    continue;
                }
                if let Value::Node(v) = &t.value {
                    if self.is_buffer(v) || operator_nodes.contains(v) || self.is_state(v) {
                        continue;
                    }
                    if seen.insert(v.clone()) {
                        stack.push(v.clone());
                    }
                }
                out.insert(t.clone());
            }
        }
        out
    }

    fn is_state(&self, s: &Symbol) -> bool {
        self.states.iter().any(|f| &f.node == s)
    }

    // ------------------------------------------------------------------
    // Mutation
    // ------------------------------------------------------------------

    fn insert(
        &mut self,
        triple: Triple,
        class: ElementClass,
        meta: Option<WmMeta>,
        _now: Ms,
    ) -> ElementId {
        let id = ElementId(self.next_id);
        self.next_id += 1;
        self.by_triple.insert(triple.clone(), id);
        self.by_node.entry(triple.node.clone()).or_default().insert(id);
        self.slots.insert(id, Slot { element: Element { id, triple }, class, meta });
        id
    }

    fn placed(&self, node: &Symbol) -> bool {
        if self.is_buffer(node) {
            return true;
        }
        self.buffers.iter().any(|b| {
            CHUNK_FIELDS
                .iter()
                .any(|f| self.field_target(b, f).as_ref() == Some(node))
        })
    }

    /// Adds a persistent element. Adding a triple that is already present
    /// returns the existing id and marks it persistent.
    pub fn add(&mut self, triple: Triple, provenance: Provenance, now: Ms) -> Result<ElementId, WmError> {
        self.add_with(triple, provenance, now, None)
    }

    /// Adds an element supported only by the justification `inst`; it is
    /// removed once every justification has been retracted.
    pub fn add_justified(
        &mut self,
        triple: Triple,
        inst: InstId,
        now: Ms,
    ) -> Result<ElementId, WmError> {
        self.add_with(triple, Provenance::Rule(inst), now, Some(inst))
    }

    fn add_with(
        &mut self,
        triple: Triple,
        provenance: Provenance,
        now: Ms,
        justification: Option<InstId>,
    ) -> Result<ElementId, WmError> {
        if triple.edge.as_str() == "status" {
            return Err(WmError::WallViolation(triple));
        }
        if self.mode == Mode::Actr && !self.placed(&triple.node) {
            return Err(WmError::Placement(triple));
        }
        if let Some(&id) = self.by_triple.get(&triple) {
            if let Some(meta) = self.slots.get_mut(&id).and_then(|s| s.meta.as_mut()) {
                match justification {
                    Some(inst) => {
                        meta.justifications.insert(inst);
                        self.justified.entry(inst).or_default().insert(id);
                    }
                    None => meta.persistent = true,
                }
            }
            return Ok(id);
        }
        let (class, derivation) = match provenance {
            Provenance::Rule(i) => (ElementClass::Rule, Some(Derivation::Instantiation(i))),
            Provenance::Retrieval { cue, request } => {
                (ElementClass::Retrieval, Some(Derivation::Retrieval { cue, request }))
            }
            Provenance::Percept => (ElementClass::Percept, None),
            Provenance::Architecture => (ElementClass::Architecture, None),
        };
        let meta = WmMeta {
            created_at: now,
            accesses: vec![now],
            derivation,
            copy_of: None,
            persistent: justification.is_none(),
            justifications: justification.into_iter().collect(),
        };
        let id = self.insert(triple, class, Some(meta), now);
        if let Some(inst) = justification {
            self.justified.entry(inst).or_default().insert(id);
        }
        Ok(id)
    }

    /// Records which declarative chunk an element was copied from.
    pub(crate) fn set_copy_of(&mut self, id: ElementId, source: Symbol) {
        if let Some(meta) = self.slots.get_mut(&id).and_then(|s| s.meta.as_mut()) {
            meta.copy_of = Some(source);
        }
    }

    pub(crate) fn make_persistent(&mut self, id: ElementId) {
        if let Some(meta) = self.slots.get_mut(&id).and_then(|s| s.meta.as_mut()) {
            meta.persistent = true;
        }
    }

    pub fn remove(&mut self, id: ElementId) -> Result<Element, WmError> {
        let slot = self.slots.remove(&id).ok_or(WmError::UnknownElement(id))?;
        self.by_triple.remove(&slot.element.triple);
        if let Some(set) = self.by_node.get_mut(&slot.element.triple.node) {
            set.remove(&id);
            if set.is_empty() {
                self.by_node.remove(&slot.element.triple.node);
            }
        }
        if let Some(meta) = &slot.meta {
            for inst in &meta.justifications {
                if let Some(set) = self.justified.get_mut(inst) {
                    set.remove(&id);
                }
            }
        }
        Ok(slot.element)
    }

    pub fn remove_triple(&mut self, triple: &Triple) -> Option<Element> {
        let id = self.find(triple)?;
        self.remove(id).ok()
    }

    /// Drops the justification `inst` everywhere; elements left without
    /// support are removed and returned.
    pub fn retract(&mut self, inst: InstId) -> Vec<Element> {
        let ids = self.justified.remove(&inst).unwrap_or_default();
        let mut removed = Vec::new();
        for id in ids {
            let drop_it = match self.slots.get_mut(&id).and_then(|s| s.meta.as_mut()) {
                Some(meta) => {
                    meta.justifications.remove(&inst);
                    meta.justifications.is_empty() && !meta.persistent
                }
                None => false,
            };
            if drop_it {
                if let Ok(e) = self.remove(id) {
                    removed.push(e);
                }
            }
        }
        removed
    }

    /// Writes the status of a module. Only architecture code reaches this.
    pub(crate) fn set_status(
        &mut self,
        buffer: &Symbol,
        state: StatusState,
        detail: Option<Symbol>,
    ) -> Result<(), WmError> {
        if !self.is_buffer(buffer) {
            return Err(WmError::UnknownBuffer(buffer.clone()));
        }
        if let Some((old, id)) = self.statuses.get(buffer) {
            if old.state() == state && old.detail() == detail.as_ref() {
                return Ok(());
            }
            let id = *id;
            let _ = self.remove(id);
        }
        let triple = Triple::new(buffer.clone(), status_edge(), Value::Sym(state.symbol()));
        let id = self.insert(triple, ElementClass::Status, None, 0);
        self.statuses
            .insert(buffer.clone(), (ModuleStatus::new(buffer.clone(), state, detail), id));
        Ok(())
    }

    /// Puts a chunk into a chunk-holding field of a buffer, replacing what
    /// was there. Returns the ids of the pointer and the chunk elements.
    pub(crate) fn place_chunk(
        &mut self,
        buffer: &Symbol,
        field: &str,
        name: &Symbol,
        slots: &[(Symbol, Value)],
        provenance: Provenance,
        now: Ms,
    ) -> Result<Vec<ElementId>, WmError> {
        if !self.is_buffer(buffer) {
            return Err(WmError::UnknownBuffer(buffer.clone()));
        }
        self.clear_field(buffer, field);
        let mut ids = Vec::new();
        let pointer = Triple::new(buffer.clone(), Symbol::raw(field), Value::Node(name.clone()));
        ids.push(self.add(pointer, provenance.clone(), now)?);
        for (edge, value) in slots {
            ids.push(self.add(Triple::new(name.clone(), edge.clone(), value.clone()), provenance.clone(), now)?);
        }
        Ok(ids)
    }

    /// Removes a field pointer and, when nothing else points at it, the chunk
    /// behind it. Returns the chunk that was held.
    pub(crate) fn clear_field(&mut self, buffer: &Symbol, field: &str) -> Option<Chunk> {
        let pointer = self.on_node(buffer).into_iter().find(|id| {
            self.slots[id].element.triple.edge.as_str() == field
        })?;
        let target = self.slots[&pointer].element.triple.value.as_node().cloned();
        let _ = self.remove(pointer);
        let target = target?;
        let chunk = self.chunk(&target);
        let still_referenced = self
            .slots
            .values()
            .any(|s| s.element.triple.value.as_node() == Some(&target));
        if !still_referenced && !self.is_buffer(&target) && !self.is_state(&target) {
            for id in self.on_node(&target) {
                let _ = self.remove(id);
            }
        }
        chunk
    }

    /// Clears a buffer: its own slots and all chunk fields. Status is reset
    /// to free. Returns the chunks that were held, payload first.
    pub(crate) fn clear_buffer(&mut self, buffer: &Symbol) -> Result<Vec<Chunk>, WmError> {
        if !self.is_buffer(buffer) {
            return Err(WmError::UnknownBuffer(buffer.clone()));
        }
        let mut chunks = Vec::new();
        if let Some(p) = self.payload_chunk(buffer) {
            for e in p.elements() {
                let _ = self.remove(e.id);
            }
            chunks.push(p);
        }
        for field in ["retrieved", "percept", "payload", "cue"] {
            if let Some(c) = self.clear_field(buffer, field) {
                if field != "cue" {
                    chunks.push(c);
                }
            }
        }
        self.set_status(buffer, StatusState::Free, None)?;
        Ok(chunks)
    }

    /// Appends `now` to an element's access history. Status and percept
    /// elements keep no history.
    pub fn touch(&mut self, id: ElementId, now: Ms) -> Result<(), WmError> {
        let slot = self.slots.get_mut(&id).ok_or(WmError::UnknownElement(id))?;
        if matches!(slot.class, ElementClass::Status | ElementClass::Percept) {
            return Ok(());
        }
        if let Some(meta) = slot.meta.as_mut() {
            meta.accesses.push(now);
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Substates
    // ------------------------------------------------------------------

    /// Creates a substate describing an impasse and makes it the deepest state.
    pub fn create_substate(
        &mut self,
        impasse: Symbol,
        candidates: &[Symbol],
        now: Ms,
    ) -> Result<Symbol, WmError> {
        if self.mode != Mode::Soar {
            return Err(WmError::UnsupportedMode("soar"));
        }
        let parent = self.states.last().expect("soar mode has a top state").node.clone();
        let node = loop {
            self.substate_counter += 1;
            let candidate = Symbol::raw(&format!("S{}", self.substate_counter));
            if !self.by_node.contains_key(&candidate)
                && !self.slots.values().any(|s| s.element.triple.value.as_symbol() == Some(&candidate))
            {
                break candidate;
            }
        };
        let watermark = self.next_id();
        self.states.push(StateFrame {
            node: node.clone(),
            impasse: Some(impasse.clone()),
            candidates: candidates.to_vec(),
            watermark,
            created_at: now,
        });
        let a = Provenance::Architecture;
        self.add(Triple::new(node.clone(), Symbol::raw("superstate"), Value::Node(parent)), a.clone(), now)?;
        self.add(Triple::new(node.clone(), Symbol::raw("impasse"), Value::Sym(impasse)), a.clone(), now)?;
        for c in candidates {
            self.add(Triple::new(node.clone(), Symbol::raw("item"), Value::Node(c.clone())), a.clone(), now)?;
        }
        Ok(node)
    }

    /// Removes a substate, any deeper states, and every element that is no
    /// longer linked from a remaining state.
    ///
    /// The count treats each removed state's bookkeeping chunk as one unit
    /// and adds every other element that went away with it.
    pub fn resolve_substate(&mut self, state: &Symbol) -> Result<usize, WmError> {
        let idx = self
            .states
            .iter()
            .position(|f| &f.node == state)
            .ok_or_else(|| WmError::NotASubstate(state.clone()))?;
        if idx == 0 {
            return Err(WmError::CannotRemoveTop);
        }
        let popped: Vec<StateFrame> = self.states.drain(idx..).collect();
        let popped_nodes: BTreeSet<Symbol> = popped.iter().map(|f| f.node.clone()).collect();
        let levels = self.levels();
        let doomed: Vec<ElementId> = self
            .slots
            .iter()
            .filter(|(_, s)| !levels.contains_key(&s.element.triple.node))
            .map(|(id, _)| *id)
            .collect();
        let mut count = popped.len();
        for id in doomed {
            let bookkeeping = {
                let s = &self.slots[&id];
                s.class == ElementClass::Architecture && popped_nodes.contains(&s.element.triple.node)
            };
            if !bookkeeping {
                count += 1;
            }
            let _ = self.remove(id);
        }
        Ok(count)
    }

    /// Removes elements that violate the mode's containment rule: unlinked
    /// elements in Soar mode, elements outside every buffer in ACT-R mode.
    pub fn collect_orphans(&mut self) -> Vec<Element> {
        let doomed: Vec<ElementId> = match self.mode {
            Mode::Soar => {
                let levels = self.levels();
                self.slots
                    .iter()
                    .filter(|(_, s)| !levels.contains_key(&s.element.triple.node))
                    .map(|(id, _)| *id)
                    .collect()
            }
            Mode::Actr => {
                let mut held: BTreeSet<Symbol> = self.buffers.iter().cloned().collect();
                for b in &self.buffers {
                    for f in CHUNK_FIELDS {
                        if let Some(t) = self.field_target(b, f) {
                            held.insert(t);
                        }
                    }
                }
                self.slots
                    .iter()
                    .filter(|(_, s)| !held.contains(&s.element.triple.node))
                    .map(|(id, _)| *id)
                    .collect()
            }
        };
        doomed.into_iter().filter_map(|id| self.remove(id).ok()).collect()
    }

    /// Activation-based forgetting (Soar mode, when enabled). Elements on
    /// buffer nodes, links to buffers, status and bookkeeping are exempt.
    pub fn forget(&mut self, threshold: f64, now: Ms) -> Vec<ElementId> {
        let Some(decay) = self.decay else {
            return Vec::new();
        };
        if self.mode != Mode::Soar {
            return Vec::new();
        }
        let doomed: Vec<ElementId> = self
            .slots
            .iter()
            .filter(|(_, s)| {
                let t = &s.element.triple;
                let exempt = matches!(s.class, ElementClass::Status | ElementClass::Architecture)
                    || self.is_buffer(&t.node)
                    || t.value.as_node().is_some_and(|v| self.is_buffer(v));
                !exempt
                    && s.meta
                        .as_ref()
                        .is_some_and(|m| bla(&m.accesses, now, decay) < threshold)
            })
            .map(|(id, _)| *id)
            .collect();
        for id in &doomed {
            let _ = self.remove(*id);
        }
        doomed
    }

    /// Checks the mode's containment invariant without changing anything.
    pub fn audit_containment(&self) -> Vec<Triple> {
        let mut copy = self.clone();
        copy.collect_orphans().into_iter().map(|e| e.triple).collect()
    }
}

//! Module requests issued by rules, and the events that complete them.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{InstId, Ms, StatusState, Triple, Value};
use crate::declarative::episodic::Direction;
use crate::declarative::{
    blend, latency, retrieve, spontaneous, spread_actr, spread_soar, Cue, RetrievalOutcome, StoreCause,
};
use crate::error::RunError;
use crate::learning::RewardSource;
use crate::procedural::{BoundArgs, BoundCommand};
use crate::symbol::Symbol;
use crate::wm::{Mode, Provenance, CHUNK_FIELDS};

use super::schedule::{EventKind, ModuleResult};
use super::trace::RetrievalEvent;
use super::{motor_text, Runtime};

fn percept_buffer() -> Symbol {
    Symbol::named("percept")
}

impl Runtime {
    /// Issues a module command at `at`, the end of the cycle that made it.
    pub(super) fn command(&mut self, c: BoundCommand, at: Ms) -> Result<(), RunError> {
        let buffer = c.buffer.clone();
        match (c.name.as_str(), &c.args) {
            ("retrieve", BoundArgs::Cue(items)) => {
                let b = buffer.expect("validated retrieve has a buffer");
                let cue = Cue::new(items.clone());
                self.begin_request(&b, at)?;
                let sources = self.context_sources();
                let spread = self.spread(&sources, at);
                let params = self.config.retrieval.clone();
                let outcome = retrieve(&mut self.sm, &cue, &params, &spread, at, &mut self.rng);
                let (result, lat) = match outcome {
                    RetrievalOutcome::Success { chunk, latency, .. } => {
                        if self.config.associations {
                            self.sm.record_cooccurrence(&sources, &chunk.name, at);
                        }
                        (ModuleResult::Chunk { root: chunk, extra: Vec::new() }, latency)
                    }
                    RetrievalOutcome::Failure { latency } => (ModuleResult::Failure, latency),
                };
                self.finish_request(b, "retrieve", result, lat, c.issuer, at);
            }
            ("retrieve-blend", BoundArgs::Cue(items)) => {
                let b = buffer.expect("validated blend has a buffer");
                let cue = Cue::new(items.clone());
                self.begin_request(&b, at)?;
                let sources = self.context_sources();
                let spread = self.spread(&sources, at);
                let params = self.config.retrieval.clone();
                let (result, lat) = match blend(&self.sm, &cue, &params, &spread, at, &mut self.rng) {
                    Some((slots, a)) => {
                        self.built_counter += 1;
                        let name = Symbol::named(&format!("blend-{}", self.built_counter));
                        (ModuleResult::Built { name, slots, extra: Vec::new() }, latency(a, params.latency_factor))
                    }
                    None => (ModuleResult::Failure, latency(params.threshold, params.latency_factor)),
                };
                self.finish_request(b, "retrieve-blend", result, lat, c.issuer, at);
            }
            ("retrieve-name", BoundArgs::Name { name, depth }) => {
                let b = buffer.expect("validated retrieve-name has a buffer");
                self.begin_request(&b, at)?;
                let result = match self.sm.retrieve_by_name(name, depth.unwrap_or(0), at) {
                    Some(mut chunks) if !chunks.is_empty() => {
                        let root = chunks.remove(0);
                        ModuleResult::Chunk { root, extra: chunks }
                    }
                    _ => ModuleResult::Failure,
                };
                self.finish_request(b, "retrieve-name", result, 0, c.issuer, at);
            }
            ("em-query", BoundArgs::Episode(cue)) => {
                let b = buffer.expect("validated em-query has a buffer");
                self.begin_request(&b, at)?;
                let found = self.em.retrieve(cue);
                let result = self.episode_result(&b, found);
                self.finish_request(b, "em-query", result, 0, c.issuer, at);
            }
            (dir @ ("em-next" | "em-prev"), _) => {
                let b = buffer.expect("validated episodic command has a buffer");
                self.begin_request(&b, at)?;
                let direction = if dir == "em-next" { Direction::Next } else { Direction::Prev };
                let found = self.em_cursor.get(&b).and_then(|e| self.em.step(e, direction));
                let result = self.episode_result(&b, found);
                let kind = dir.to_string();
                self.finish_request(b, &kind, result, 0, c.issuer, at);
            }
            ("store", BoundArgs::Terms(terms)) => {
                let Some(node) = terms.first().and_then(|v| v.as_symbol()).cloned() else {
                    return Ok(());
                };
                if let Some(chunk) = self.wm.chunk(&node) {
                    let mode = self.config.mode;
                    let _ = self.sm.store_chunk(mode, &node, chunk.slots(), at, StoreCause::ExplicitCommand);
                }
            }
            ("motor", BoundArgs::Terms(terms)) => {
                let b = buffer.expect("validated motor has a buffer");
                let text = motor_text(terms);
                let Some(resp) = self.env.response(&text).cloned() else {
                    return Err(RunError::UnknownEnvironmentResponse(text));
                };
                self.wm.set_status(&b, StatusState::Busy, None)?;
                self.schedule.push(
                    at + resp.latency,
                    EventKind::MotorComplete { buffer: b, command: text, success: resp.success, percept: resp.percept },
                );
            }
            ("halt", _) => self.halt_requested = true,
            _ => {}
        }
        Ok(())
    }

    /// Marks the buffer busy and clears its previous result. Buffer mode
    /// merges the cleared chunk back into declarative memory.
    fn begin_request(&mut self, b: &Symbol, at: Ms) -> Result<(), RunError> {
        if let Some(c) = self.wm.clear_field(b, "retrieved") {
            self.store_cleared(b, vec![c], at);
        }
        self.wm.set_status(b, StatusState::Busy, None)?;
        Ok(())
    }

    fn finish_request(&mut self, b: Symbol, kind: &str, result: ModuleResult, lat: Ms, request: InstId, at: Ms) {
        // buffer mode charges retrieval latency; state-mode stores answer by the next cycle
        let lat = if self.config.mode == Mode::Actr { lat } else { 0 };
        let token = self.next_token;
        self.next_token += 1;
        self.tokens.insert(b.clone(), token);
        self.log.retrievals.push(RetrievalEvent {
            buffer: b.to_string(),
            event: "request".into(),
            kind: kind.into(),
            latency_ms: Some(lat),
            result: None,
        });
        self.schedule.push(at + lat, EventKind::RetrievalComplete { buffer: b, result, request, token });
    }

    /// Symbols that spread activation: values in buffer-held chunks
    /// (buffer mode), or the stored chunks that working memory holds
    /// copies of (state mode).
    pub(super) fn context_sources(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        match self.config.mode {
            Mode::Actr => {
                for b in self.wm.buffers() {
                    let mut chunks = Vec::new();
                    chunks.extend(self.wm.payload_chunk(b));
                    for f in CHUNK_FIELDS {
                        if let Some(t) = self.wm.field_target(b, f) {
                            chunks.extend(self.wm.chunk(&t));
                        }
                    }
                    for c in chunks {
                        out.extend(c.slots().into_iter().filter_map(|(_, v)| v.as_symbol().cloned()));
                    }
                }
            }
            Mode::Soar => {
                for e in self.wm.elements() {
                    if let Some(src) = self.wm.meta(e.id).and_then(|m| m.copy_of.clone()) {
                        out.insert(src);
                    }
                }
            }
        }
        out
    }

    fn spread(&self, sources: &BTreeSet<Symbol>, at: Ms) -> BTreeMap<Symbol, f64> {
        let p = &self.config.retrieval;
        match self.config.mode {
            Mode::Actr if p.assoc_strength > 0.0 => spread_actr(sources, &self.sm, p.assoc_strength),
            Mode::Soar if p.depth > 0 => spread_soar(sources, &self.sm, p.depth, at, p.decay),
            _ => BTreeMap::new(),
        }
    }

    /// Copies an episode into working memory under a fresh root. The top
    /// state maps to the root; every other node gets a prefixed name.
    fn episode_result(&mut self, b: &Symbol, found: Option<crate::declarative::Episode>) -> ModuleResult {
        let Some(ep) = found else {
            self.em_cursor.remove(b);
            return ModuleResult::Failure;
        };
        self.em_cursor.insert(b.clone(), ep);
        let root = Symbol::named(&format!("ep{}", ep.index + 1));
        let top = self.config.top_state.clone();
        let map = |s: &Symbol| if *s == top { root.clone() } else { Symbol::named(&format!("{root}-{s}")) };
        let mut nodes: BTreeMap<Symbol, Vec<(Symbol, Value)>> = BTreeMap::new();
        for t in self.em.reconstruct(&ep) {
            let value = match &t.value {
                Value::Node(n) => Value::Node(map(n)),
                v => v.clone(),
            };
            nodes.entry(map(&t.node)).or_default().push((t.edge.clone(), value));
        }
        let mut slots = nodes.remove(&root).unwrap_or_default();
        slots.push((Symbol::named("episode-cycle"), Value::Num(ep.cycle as f64)));
        ModuleResult::Built { name: root, slots, extra: nodes.into_iter().collect() }
    }

    /// Applies an event other than a cycle start.
    pub(super) fn deliver(&mut self, kind: EventKind) -> Result<(), RunError> {
        let at = self.now;
        match kind {
            EventKind::RetrievalComplete { buffer, result, request, token } => {
                if self.tokens.get(&buffer) != Some(&token) {
                    return Ok(());
                }
                let kind = self
                    .log
                    .retrievals
                    .iter()
                    .rev()
                    .find(|r| r.buffer == buffer.as_str())
                    .map(|r| r.kind.clone())
                    .unwrap_or_else(|| "retrieve".into());
                let prov = Provenance::Retrieval { cue: Vec::new(), request: Some(request) };
                let (name, status) = match result {
                    ModuleResult::Chunk { root, extra } => {
                        let ids = self.wm.place_chunk(&buffer, "retrieved", &root.name, &root.slots, prov.clone(), at)?;
                        if self.config.mode == Mode::Soar {
                            for id in ids.iter().skip(1) {
                                self.wm.set_copy_of(*id, root.name.clone());
                            }
                            for c in extra {
                                for (e, v) in &c.slots {
                                    let id = self.wm.add(Triple::new(c.name.clone(), e.clone(), v.clone()), prov.clone(), at)?;
                                    self.wm.set_copy_of(id, c.name.clone());
                                }
                            }
                        }
                        (Some(root.name.to_string()), StatusState::Success)
                    }
                    ModuleResult::Built { name, slots, extra } => {
                        self.wm.place_chunk(&buffer, "retrieved", &name, &slots, prov.clone(), at)?;
                        for (node, slots) in extra {
                            for (e, v) in slots {
                                self.wm.add(Triple::new(node.clone(), e, v), prov.clone(), at)?;
                            }
                        }
                        (Some(name.to_string()), StatusState::Success)
                    }
                    ModuleResult::Failure => (None, StatusState::Failure),
                };
                self.wm.set_status(&buffer, status, None)?;
                self.log.retrievals.push(RetrievalEvent {
                    buffer: buffer.to_string(),
                    event: "complete".into(),
                    kind,
                    latency_ms: None,
                    result: name,
                });
            }
            EventKind::MotorComplete { buffer, success, percept, .. } => {
                let state = if success { StatusState::Success } else { StatusState::Failure };
                self.wm.set_status(&buffer, state, None)?;
                if let Some(p) = percept {
                    self.wm.place_chunk(&percept_buffer(), "percept", &p.node, &p.slots, Provenance::Percept, at)?;
                }
            }
            EventKind::PerceptArrival { chunk } => {
                self.wm.place_chunk(&percept_buffer(), "percept", &chunk.node, &chunk.slots, Provenance::Percept, at)?;
            }
            EventKind::Reward { amount } => match self.config.mode {
                Mode::Actr => self.actr_reward(amount, at, RewardSource::External),
                Mode::Soar => self.reward_acc += amount,
            },
            EventKind::CycleStart | EventKind::Halt => {}
        }
        Ok(())
    }

    /// Buffer mode: an idle retrieval buffer may fill itself with the most
    /// active chunk.
    pub(super) fn spontaneous_retrieval(&mut self, at: Ms) -> Result<(), RunError> {
        let b = Symbol::named("retrieval");
        if !self.wm.is_buffer(&b) {
            return Ok(());
        }
        let empty = self.wm.field_target(&b, "retrieved").is_none()
            && self.wm.status(&b).is_some_and(|s| s.state() == StatusState::Free);
        let Some(name) = spontaneous(&self.sm, empty, &self.config.retrieval, at) else {
            return Ok(());
        };
        let chunk = self.sm.get(&name).expect("chosen chunk exists").clone();
        self.sm.mark_retrieved(&name, at);
        let prov = Provenance::Retrieval { cue: Vec::new(), request: None };
        self.wm.place_chunk(&b, "retrieved", &chunk.name, &chunk.slots, prov, at)?;
        self.wm.set_status(&b, StatusState::Success, None)?;
        self.log.retrievals.push(RetrievalEvent {
            buffer: b.to_string(),
            event: "complete".into(),
            kind: "spontaneous".into(),
            latency_ms: None,
            result: Some(name.to_string()),
        });
        Ok(())
    }
}

//! The discrete-event runtime: cognitive cycles, module latencies, the
//! scripted environment, trace emission and store persistence.
//!
//! Every step pops events in `(time, sequence)` order. Module completions,
//! percepts and rewards are applied as they come; a `cycle-start` event runs
//! one cognitive cycle, which costs `cycle-ms` of simulated time. Module
//! requests made during a cycle are issued at its end, so a completion with
//! zero latency is visible to the next cycle.

mod actr;
mod inspect;
mod modules;
pub mod schedule;
mod soar;
pub mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Quiescence, RunConfig};
use crate::data::{ElementId, InstId, Ms, Triple, Value};
use crate::declarative::episodic::Episode;
use crate::declarative::semantic::StoreCause;
use crate::declarative::{snapshot, EpisodicStore, SemanticStore};
use crate::dsl::{EnvScript, Model};
use crate::error::RunError;
use crate::learning::canonical;
use crate::procedural::{ElaborationState, FiredRecord, Origin, ProceduralMemory, Production};
use crate::symbol::Symbol;
use crate::wm::{Mode, Provenance, WmDelta, WorkingMemory};

pub use inspect::AuditReport;
pub use schedule::{EventKind, ModuleResult, Schedule, ScheduledEvent};
pub use trace::{
    buffer_views, BufferView, DeltaView, Firing, ImpasseEvent, LearningEvent, RetrievalEvent, TraceRecord,
};

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Halt,
    Quiescence,
    MaxCycles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cycles: u64,
    pub time_ms: Ms,
    pub reason: StopReason,
}

/// Everything collected for the record of the step in progress.
#[derive(Debug, Default)]
struct StepLog {
    fired: Vec<Firing>,
    impasses: Vec<ImpasseEvent>,
    learning: Vec<LearningEvent>,
    retrievals: Vec<RetrievalEvent>,
}

pub struct Runtime {
    config: RunConfig,
    wm: WorkingMemory,
    pm: ProceduralMemory,
    sm: SemanticStore,
    em: EpisodicStore,
    env: EnvScript,
    schedule: Schedule,
    rng: ChaCha8Rng,
    now: Ms,
    cycle: u64,
    halted: bool,
    halt_requested: bool,
    stop: Option<StopReason>,
    next_inst: u64,
    trace: Vec<TraceRecord>,
    log: StepLog,
    /// Latest request token per buffer.
    tokens: BTreeMap<Symbol, u64>,
    next_token: u64,
    built_counter: u64,
    /// Canonical text of every rule -> its name, to spot relearning.
    canon: BTreeMap<String, Symbol>,
    learned_counter: u64,
    impasses_created: u64,

    // buffer mode
    reward_history: Vec<(Symbol, Ms)>,
    last_fired: Option<FiredRecord>,

    // state mode
    elab: ElaborationState,
    refracted: BTreeSet<(Symbol, Vec<ElementId>)>,
    substate_records: BTreeMap<InstId, FiredRecord>,
    chunk_counts: BTreeMap<String, u32>,
    /// Value and contributing rules of the last top-level selection.
    rl_prev: Option<(f64, Vec<Symbol>)>,
    reward_acc: f64,
    em_prev: BTreeSet<Triple>,
    em_cursor: BTreeMap<Symbol, Episode>,
}

fn bad_model(n: usize) -> RunError {
    RunError::InvalidModel(n)
}

impl Runtime {
    /// Builds a runtime at time 0 from a validated model. The seed and the
    /// other run settings come from `model.config`.
    pub fn new(model: &Model, env: Option<EnvScript>) -> Result<Runtime, RunError> {
        let config = model.config.clone();
        let mode = model.mode;
        let mut wm = WorkingMemory::new(mode, model.buffers.clone(), config.top_state.clone(), 0);
        wm.set_decay(config.wm_decay);
        load_initial_wm(&mut wm, model)?;

        let mut sm = SemanticStore::new();
        for c in &model.dm {
            // empty chunks are rejected by validation
            let _ = sm.store_chunk(mode, &c.node, c.slots.clone(), 0, StoreCause::ExplicitCommand);
        }

        let mut pm = ProceduralMemory::new();
        let mut canon = BTreeMap::new();
        for p in &model.productions {
            canon.insert(canonical(p), p.name.clone());
            pm.add(p.clone(), config.utility.init_utility, 0);
        }

        let env = env.unwrap_or_default();
        let mut schedule = Schedule::new();
        for p in &env.percepts {
            schedule.push(p.at, EventKind::PerceptArrival { chunk: p.chunk.clone() });
        }
        for r in &env.rewards {
            schedule.push(r.at, EventKind::Reward { amount: r.amount });
        }
        schedule.push(0, EventKind::CycleStart);

        let em_prev = if mode == Mode::Soar { wm.top_state_snapshot() } else { BTreeSet::new() };
        let init = TraceRecord {
            buffers: buffer_views(&wm),
            phase: "init".into(),
            wm_delta: DeltaView::from_delta(&WmDelta::between(&BTreeSet::new(), &wm.triples())),
            ..Default::default()
        };
        Ok(Runtime {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            wm,
            pm,
            sm,
            em: EpisodicStore::new(),
            env,
            schedule,
            now: 0,
            cycle: 0,
            halted: false,
            halt_requested: false,
            stop: None,
            next_inst: 1,
            trace: vec![init],
            log: StepLog::default(),
            tokens: BTreeMap::new(),
            next_token: 1,
            built_counter: 0,
            canon,
            learned_counter: 0,
            impasses_created: 0,
            reward_history: Vec::new(),
            last_fired: None,
            elab: ElaborationState::new(),
            refracted: BTreeSet::new(),
            substate_records: BTreeMap::new(),
            chunk_counts: BTreeMap::new(),
            rl_prev: None,
            reward_acc: 0.0,
            em_prev,
            em_cursor: BTreeMap::new(),
        })
    }

    /// Parses, validates and builds in one go.
    pub fn from_source(src: &str, env: Option<EnvScript>) -> Result<Runtime, RunError> {
        let (model, diags) = crate::dsl::load(src);
        match model {
            Some(m) => Runtime::new(&m, env),
            None => Err(bad_model(diags.iter().filter(|d| d.severity == crate::dsl::Severity::Error).count())),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn now(&self) -> Ms {
        self.now
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn wm(&self) -> &WorkingMemory {
        &self.wm
    }

    pub fn productions(&self) -> &ProceduralMemory {
        &self.pm
    }

    pub fn semantic(&self) -> &SemanticStore {
        &self.sm
    }

    pub fn episodic(&self) -> &EpisodicStore {
        &self.em
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn trace_jsonl(&self) -> String {
        trace::to_jsonl(&self.trace)
    }

    /// Number of substates created so far.
    pub fn impasse_count(&self) -> u64 {
        self.impasses_created
    }

    /// Rules learned by compilation or chunking that are still present.
    pub fn learned_rules(&self) -> Vec<Production> {
        self.pm.iter().filter(|p| p.origin != Origin::HandWritten).cloned().collect()
    }

    /// Adds a rule, for instance one learned in an earlier run.
    pub fn add_production(&mut self, p: Production) {
        self.canon.insert(canonical(&p), p.name.clone());
        self.pm.add(p, self.config.utility.init_utility, self.now);
    }

    /// Queues a halt at simulated time `at`.
    pub fn schedule_halt(&mut self, at: Ms) {
        self.schedule.push(at, EventKind::Halt);
    }

    pub fn save_dm(&self, path: &Path) -> Result<(), RunError> {
        snapshot::save(path, &self.sm, &self.em)?;
        Ok(())
    }

    /// Replaces both stores with a snapshot. On any error the stores are
    /// left as they were.
    pub fn load_dm(&mut self, path: &Path) -> Result<(), RunError> {
        let (sm, em) = snapshot::load(path)?;
        self.sm = sm;
        self.em = em;
        Ok(())
    }

    fn inst_id(&mut self) -> InstId {
        let id = InstId(self.next_inst);
        self.next_inst += 1;
        id
    }

    /// Runs until halt, quiescence or `max_cycles` counted cycles.
    pub fn run(&mut self) -> Result<RunSummary, RunError> {
        let limit = self.config.max_cycles;
        self.run_for(limit)
    }

    /// Runs until halt, quiescence or the cycle counter reaches `limit`.
    pub fn run_for(&mut self, limit: u64) -> Result<RunSummary, RunError> {
        while !self.halted && self.cycle < limit {
            self.step()?;
        }
        let reason = self.stop.unwrap_or(StopReason::MaxCycles);
        Ok(RunSummary { cycles: self.cycle, time_ms: self.now, reason })
    }

    /// Executes one cognitive cycle and returns its record. A step that
    /// finds nothing to do ends the run with a `quiescent` record instead.
    pub fn step(&mut self) -> Result<TraceRecord, RunError> {
        if self.halted {
            return Err(RunError::Halted);
        }
        let before = self.wm.triples();
        self.log = StepLog::default();
        loop {
            let Some(ev) = self.schedule.pop() else {
                return Ok(self.finish(before, "quiescent", StopReason::Quiescence));
            };
            self.now = self.now.max(ev.at);
            match ev.kind {
                EventKind::CycleStart => {
                    let ran = match self.config.mode {
                        Mode::Actr => self.actr_cycle()?,
                        Mode::Soar => self.soar_cycle()?,
                    };
                    if ran {
                        self.cycle += 1;
                        self.now += self.config.cycle_ms;
                        self.end_of_cycle()?;
                        if self.halt_requested {
                            return Ok(self.finish(before, "halt", StopReason::Halt));
                        }
                        self.schedule.push(self.now, EventKind::CycleStart);
                        return Ok(self.record(before, "cycle"));
                    }
                    // nothing happened; wait for the next event when allowed
                    let wait = self.config.mode == Mode::Soar || self.config.quiescence == Quiescence::Wait;
                    match self.schedule.peek_time() {
                        Some(t) if wait => {
                            self.schedule.push(t, EventKind::CycleStart);
                        }
                        _ => return Ok(self.finish(before, "quiescent", StopReason::Quiescence)),
                    }
                }
                EventKind::Halt => return Ok(self.finish(before, "halt", StopReason::Halt)),
                other => self.deliver(other)?,
            }
        }
    }

    fn finish(&mut self, before: BTreeSet<Triple>, phase: &str, reason: StopReason) -> TraceRecord {
        self.halted = true;
        self.stop = Some(reason);
        if self.config.mode == Mode::Soar {
            self.rl_update(None, Vec::new());
        }
        self.record(before, phase)
    }

    fn record(&mut self, before: BTreeSet<Triple>, phase: &str) -> TraceRecord {
        let log = std::mem::take(&mut self.log);
        let r = TraceRecord {
            buffers: buffer_views(&self.wm),
            cycle: self.cycle,
            fired: log.fired,
            impasses: log.impasses,
            learning: log.learning,
            phase: phase.to_string(),
            retrievals: log.retrievals,
            time_ms: self.now,
            wm_delta: DeltaView::from_delta(&WmDelta::between(&before, &self.wm.triples())),
        };
        self.trace.push(r.clone());
        r
    }

    /// Bookkeeping after a counted cycle; `self.now` is already its end.
    fn end_of_cycle(&mut self) -> Result<(), RunError> {
        let now = self.now;
        if self.config.mode == Mode::Actr && self.config.spontaneous {
            self.spontaneous_retrieval(now)?;
        }
        self.wm.collect_orphans();
        if self.config.mode == Mode::Soar {
            self.wm.forget(self.config.wm_forget_threshold, now);
            self.wm.collect_orphans();
            if self.wm.states().len() == 1 {
                self.substate_records.clear();
            }
            if self.config.episodic {
                let snap = self.wm.top_state_snapshot();
                let added: Vec<Triple> = snap.difference(&self.em_prev).cloned().collect();
                let removed: Vec<Triple> = self.em_prev.difference(&snap).cloned().collect();
                self.em.record(&added, &removed, self.cycle, now);
                self.em_prev = snap;
            }
        }
        if let Some(th) = self.config.rule_forget_threshold {
            for rule in crate::learning::forget_rules(&mut self.pm, th, self.config.retrieval.decay, now) {
                self.canon.retain(|_, v| v != &rule);
                self.log.learning.push(LearningEvent { kind: "forgotten".into(), rule: rule.to_string(), ..Default::default() });
            }
        }
        Ok(())
    }

    /// Removes `(reward ^amount N)` elements and returns the amounts.
    fn take_rewards(&mut self) -> Vec<f64> {
        let rb = Symbol::named("reward");
        if !self.wm.is_buffer(&rb) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for id in self.wm.on_node(&rb) {
            let Some(e) = self.wm.get(id) else { continue };
            if e.triple.edge.as_str() != "amount" {
                continue;
            }
            if let Some(n) = e.triple.value.as_num() {
                out.push(n);
            }
            let _ = self.wm.remove(id);
        }
        out
    }

    fn learn_event(&mut self, kind: &str, rule: &Symbol, parents: Vec<String>) {
        self.log.learning.push(LearningEvent { kind: kind.into(), rule: rule.to_string(), parents, ..Default::default() });
    }

    fn utility_events(&mut self, deltas: Vec<crate::learning::UtilityDelta>) {
        for d in deltas {
            self.log.learning.push(LearningEvent {
                after: Some(d.after),
                before: Some(d.before),
                kind: "utility".into(),
                rule: d.rule.to_string(),
                ..Default::default()
            });
        }
    }

    fn fresh_rule_name(&mut self, prefix: &str) -> Symbol {
        loop {
            self.learned_counter += 1;
            let s = Symbol::named(&format!("{prefix}-{}", self.learned_counter));
            if !self.pm.contains(&s) {
                return s;
            }
        }
    }
}

/// Loads the `wm` block. In buffer mode a chunk can only be placed once a
/// buffer field points at it, so declarations are retried until no more
/// can be placed.
fn load_initial_wm(wm: &mut WorkingMemory, model: &Model) -> Result<(), RunError> {
    let mut pending: Vec<&crate::dsl::ChunkDecl> = model.wm.iter().collect();
    loop {
        let mut next = Vec::new();
        let mut progress = false;
        for c in pending {
            let placeable = model.mode == Mode::Soar
                || wm.is_buffer(&c.node)
                || wm.buffers().iter().any(|b| {
                    crate::wm::CHUNK_FIELDS.iter().any(|f| wm.field_target(b, f).as_ref() == Some(&c.node))
                });
            if !placeable {
                next.push(c);
                continue;
            }
            for (e, v) in &c.slots {
                wm.add(Triple::new(c.node.clone(), e.clone(), v.clone()), Provenance::Architecture, 0)?;
            }
            progress = true;
        }
        if next.is_empty() {
            return Ok(());
        }
        if !progress {
            let c = next[0];
            let (e, v) = c.slots.first().cloned().unwrap_or((Symbol::named("slot"), Value::sym("nil")));
            return Err(crate::error::WmError::Placement(Triple::new(c.node.clone(), e, v)).into());
        }
        pending = next;
    }
}

/// Text of a motor command: its arguments joined with single spaces.
pub fn motor_text(args: &[Value]) -> String {
    args.iter()
        .map(|v| match v {
            Value::Str(s) => s.clone(),
            Value::Node(s) | Value::Sym(s) => s.to_string(),
            Value::Num(n) => crate::data::format_number(*n),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

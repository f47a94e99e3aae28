//! Firing instantiations: sequential firing (ACT-R mode), the elaboration
//! fixpoint with justification support, and parallel operator application.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{Chunk, Derivation, ElementId, InstId, Ms, Triple, Value};
use crate::error::ProcError;
use crate::procedural::decide::Preference;
use crate::procedural::matcher::{match_productions, negation_holds};
use crate::procedural::{
    bind, bind_pattern, Action, Bindings, CommandArgs, CueTest, Instantiation, ProceduralMemory,
    Production, Role,
};
use crate::symbol::Symbol;
use crate::wm::{ElementClass, WmDelta, WorkingMemory};

#[derive(Debug, Clone, PartialEq)]
pub enum BoundArgs {
    None,
    Cue(Vec<(Symbol, CueTest<Value>)>),
    Name { name: Symbol, depth: Option<u32> },
    Episode(Vec<Triple>),
    Terms(Vec<Value>),
}

/// A module command with its arguments substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCommand {
    pub name: Symbol,
    pub buffer: Option<Symbol>,
    pub args: BoundArgs,
    pub issuer: InstId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Add(Triple),
    Remove(Triple),
    Clear(Symbol),
    Command(BoundCommand),
    Propose { state: Symbol, operator: Symbol, attrs: Vec<(Symbol, Value)> },
    Prefer(Preference),
}

impl Effect {
    /// Working-memory triples this effect creates.
    fn created_triples(&self) -> Vec<Triple> {
        match self {
            Effect::Add(t) => vec![t.clone()],
            Effect::Propose { state, operator, attrs } => {
                let mut out = vec![
                    Triple::new(state.clone(), Symbol::named("operator"), Value::Node(operator.clone())),
                    Triple::new(operator.clone(), Symbol::named("name"), Value::Sym(operator.clone())),
                ];
                out.extend(attrs.iter().map(|(e, v)| Triple::new(operator.clone(), e.clone(), v.clone())));
                out
            }
            _ => Vec::new(),
        }
    }
}

/// What an instantiation tested, captured at firing time so that learning can
/// replay the derivation after the elements themselves are gone.
#[derive(Debug, Clone, PartialEq)]
pub struct TestedElement {
    pub id: ElementId,
    pub triple: Triple,
    pub class: ElementClass,
    pub derivation: Option<Derivation>,
    pub copy_of: Option<Symbol>,
    pub level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiredRecord {
    pub id: InstId,
    pub production: Symbol,
    pub role: Role,
    pub bindings: Bindings,
    pub tested: Vec<TestedElement>,
    /// Triples this firing added (or re-supported).
    pub created: Vec<Triple>,
    pub removed: Vec<Triple>,
    pub preferences: Vec<Preference>,
    pub commands: Vec<BoundCommand>,
    pub fired_at: Ms,
    /// Deepest state level among tested elements (Soar mode).
    pub level: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FireOutcome {
    pub record: FiredRecord,
    pub delta: WmDelta,
    pub commands: Vec<BoundCommand>,
    /// Chunks removed by clear actions, per buffer.
    pub cleared: Vec<(Symbol, Vec<Chunk>)>,
}

/// Substitutes bindings into every action of `p`. Actions whose variables
/// are not all bound are skipped; validation rules that case out for
/// accepted models.
pub fn instantiate_actions(p: &Production, bindings: &Bindings, issuer: InstId) -> Vec<Effect> {
    let sym = |t: &crate::procedural::Term| bind(t, bindings).and_then(|v| v.as_symbol().cloned());
    p.actions
        .iter()
        .filter_map(|a| match a {
            Action::Add(pat) => bind_pattern(pat, bindings).map(Effect::Add),
            Action::Remove(pat) => bind_pattern(pat, bindings).map(Effect::Remove),
            Action::Clear(b) => Some(Effect::Clear(b.clone())),
            Action::Propose { state, operator, attrs } => {
                let state = sym(state)?;
                let attrs = attrs
                    .iter()
                    .map(|(e, t)| bind(t, bindings).map(|v| (e.clone(), v)))
                    .collect::<Option<Vec<_>>>()?;
                Some(Effect::Propose { state, operator: operator.clone(), attrs })
            }
            Action::Prefer { operator, kind, other } => {
                let operator = sym(operator)?;
                let other = match other {
                    Some(t) => Some(sym(t)?),
                    None => None,
                };
                Some(Effect::Prefer(Preference { operator, kind: *kind, other }))
            }
            Action::Command(c) => {
                let args = match &c.args {
                    CommandArgs::None | CommandArgs::Raw(_) => BoundArgs::None,
                    CommandArgs::Cue(items) => BoundArgs::Cue(
                        items
                            .iter()
                            .map(|i| {
                                let test = match &i.test {
                                    CueTest::Present => CueTest::Present,
                                    t => t.map(|term| bind(term, bindings).unwrap_or(Value::Num(f64::NAN))),
                                };
                                (i.edge.clone(), test)
                            })
                            .collect(),
                    ),
                    CommandArgs::Name { name, depth } => BoundArgs::Name { name: sym(name)?, depth: *depth },
                    CommandArgs::Episode(ps) => BoundArgs::Episode(
                        ps.iter().map(|p| bind_pattern(p, bindings)).collect::<Option<Vec<_>>>()?,
                    ),
                    CommandArgs::Terms(ts) => BoundArgs::Terms(
                        ts.iter().map(|t| bind(t, bindings)).collect::<Option<Vec<_>>>()?,
                    ),
                };
                Some(Effect::Command(BoundCommand {
                    name: c.name.clone(),
                    buffer: c.buffer.clone(),
                    args,
                    issuer,
                }))
            }
        })
        .collect()
}

/// Negated conditions still hold for the instantiation's bindings.
pub fn negatives_hold(wm: &WorkingMemory, p: &Production, inst: &Instantiation) -> bool {
    p.conditions
        .iter()
        .filter(|c| c.negated)
        .all(|c| negation_holds(wm, c, &inst.bindings))
}

fn still_matches(wm: &WorkingMemory, p: &Production, inst: &Instantiation) -> bool {
    inst.tested.iter().all(|id| wm.get(*id).is_some()) && negatives_hold(wm, p, inst)
}

fn describe(wm: &WorkingMemory, ids: &[ElementId], levels: Option<&BTreeMap<Symbol, usize>>) -> Vec<TestedElement> {
    ids.iter()
        .filter_map(|id| {
            let e = wm.get(*id)?;
            let meta = wm.meta(*id);
            Some(TestedElement {
                id: *id,
                triple: e.triple.clone(),
                class: wm.class(*id).unwrap_or(ElementClass::Rule),
                derivation: meta.and_then(|m| m.derivation.clone()),
                copy_of: meta.and_then(|m| m.copy_of.clone()),
                level: levels.and_then(|l| l.get(&e.triple.node).copied()),
            })
        })
        .collect()
}

fn record_for(
    p: &Production,
    inst: &Instantiation,
    id: InstId,
    tested: Vec<TestedElement>,
    now: Ms,
) -> FiredRecord {
    let level = tested.iter().filter_map(|t| t.level).max();
    FiredRecord {
        id,
        production: p.name.clone(),
        role: p.role,
        bindings: inst.bindings.clone(),
        tested,
        created: Vec::new(),
        removed: Vec::new(),
        preferences: Vec::new(),
        commands: Vec::new(),
        fired_at: now,
        level,
    }
}

/// Fires one instantiation with sequential semantics: actions apply in the
/// order written. Returns `Ok(None)` when the instantiation has gone stale
/// since it was matched.
pub fn fire(
    wm: &mut WorkingMemory,
    p: &Production,
    inst: &Instantiation,
    id: InstId,
    now: Ms,
) -> Result<Option<FireOutcome>, ProcError> {
    if !still_matches(wm, p, inst) {
        return Ok(None);
    }
    let levels = (wm.mode() == crate::wm::Mode::Soar).then(|| wm.levels());
    let tested = describe(wm, &inst.tested, levels.as_ref());
    let mut record = record_for(p, inst, id, tested, now);
    for t in &inst.tested {
        wm.touch(*t, now)?;
    }
    let before = wm.triples();
    let mut commands = Vec::new();
    let mut cleared = Vec::new();
    for effect in instantiate_actions(p, &inst.bindings, id) {
        match effect {
            Effect::Remove(t) => {
                if wm.remove_triple(&t).is_some() {
                    record.removed.push(t);
                }
            }
            Effect::Clear(b) => {
                let chunks = wm.clear_buffer(&b)?;
                cleared.push((b, chunks));
            }
            Effect::Command(c) => commands.push(c),
            Effect::Prefer(pref) => record.preferences.push(pref),
            other => {
                for t in other.created_triples() {
                    wm.add(t.clone(), crate::wm::Provenance::Rule(id), now)?;
                    record.created.push(t);
                }
            }
        }
    }
    record.commands = commands.clone();
    let delta = WmDelta::between(&before, &wm.triples());
    Ok(Some(FireOutcome { record, delta, commands, cleared }))
}

/// Result of running elaboration waves to quiescence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WaveReport {
    pub fired: Vec<FiredRecord>,
    pub retracted: Vec<InstId>,
    /// Elements removed because their last justification went away.
    pub removed: Vec<Triple>,
    pub waves: usize,
}

#[derive(Debug, Clone)]
struct ActiveInst {
    id: InstId,
    production: Symbol,
    preferences: Vec<Preference>,
}

/// Instantiations of elaboration-phase rules that currently hold, and the
/// preferences they assert.
#[derive(Debug, Clone, Default)]
pub struct ElaborationState {
    active: BTreeMap<(Symbol, Vec<ElementId>), ActiveInst>,
}

impl ElaborationState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Preferences asserted by active instantiations, with their source.
    pub fn preferences(&self) -> Vec<(InstId, Symbol, Preference)> {
        self.active
            .values()
            .flat_map(|a| a.preferences.iter().map(move |p| (a.id, a.production.clone(), p.clone())))
            .collect()
    }

    pub fn active_ids(&self) -> BTreeSet<InstId> {
        self.active.values().map(|a| a.id).collect()
    }

    /// Fires newly matching elaboration, proposal and evaluation rules in
    /// parallel waves and retracts instantiations that stopped matching,
    /// until nothing changes.
    pub fn run(
        &mut self,
        wm: &mut WorkingMemory,
        productions: &ProceduralMemory,
        next_inst: &mut u64,
        now: Ms,
        max_waves: usize,
    ) -> Result<WaveReport, ProcError> {
        let mut report = WaveReport::default();
        loop {
            let matches = match_productions(wm, productions.iter(), |p| p.role.is_elaboration_phase());
            let current: BTreeSet<(Symbol, Vec<ElementId>)> = matches.iter().map(|m| m.key()).collect();
            let gone: Vec<(Symbol, Vec<ElementId>)> =
                self.active.keys().filter(|k| !current.contains(*k)).cloned().collect();
            let fresh: Vec<&Instantiation> = matches.iter().filter(|m| !self.active.contains_key(&m.key())).collect();
            if gone.is_empty() && fresh.is_empty() {
                return Ok(report);
            }
            if report.waves >= max_waves {
                return Err(ProcError::RunawayElaboration(max_waves));
            }
            report.waves += 1;

            // everything new in this wave is matched against the pre-wave memory
            let levels = (wm.mode() == crate::wm::Mode::Soar).then(|| wm.levels());
            let mut staged = Vec::new();
            for m in fresh {
                let p = productions.get(&m.production).expect("matched production exists");
                let id = InstId(*next_inst);
                *next_inst += 1;
                let record = record_for(p, m, id, describe(wm, &m.tested, levels.as_ref()), now);
                let effects = instantiate_actions(p, &m.bindings, id);
                staged.push((m.key(), m.tested.clone(), record, effects));
            }

            for key in gone {
                let a = self.active.remove(&key).expect("active key");
                report.retracted.push(a.id);
                report.removed.extend(wm.retract(a.id).into_iter().map(|e| e.triple));
            }

            for (key, tested, mut record, effects) in staged {
                // a retraction in this wave can take away what a new match tested
                if tested.iter().any(|t| wm.get(*t).is_none()) {
                    continue;
                }
                for t in &tested {
                    wm.touch(*t, now)?;
                }
                for effect in effects {
                    match effect {
                        Effect::Prefer(p) => record.preferences.push(p),
                        other => {
                            for t in other.created_triples() {
                                wm.add_justified(t.clone(), record.id, now)?;
                                record.created.push(t);
                            }
                        }
                    }
                }
                self.active.insert(
                    key,
                    ActiveInst { id: record.id, production: record.production.clone(), preferences: record.preferences.clone() },
                );
                report.fired.push(record);
            }
        }
    }
}

/// Outcome of applying a selected operator.
#[derive(Debug, Clone, PartialEq)]
pub enum ApplyOutcome {
    Applied {
        fired: Vec<FiredRecord>,
        delta: WmDelta,
        commands: Vec<BoundCommand>,
        cleared: Vec<(Symbol, Vec<Chunk>)>,
        /// Triples both created and removed in the wave; removal won.
        conflicts: Vec<Triple>,
    },
    NoChange,
}

/// Fires every matching application rule for `operator` as one parallel wave.
///
/// All instantiations are matched against the memory as it was before the
/// wave; their creations and removals are unioned, and a triple that is both
/// created and removed ends up absent. Instantiations whose key is in
/// `refracted` are skipped, and fired keys are added to it.
pub fn apply_operator(
    wm: &mut WorkingMemory,
    productions: &ProceduralMemory,
    operator: &Symbol,
    refracted: &mut BTreeSet<(Symbol, Vec<ElementId>)>,
    next_inst: &mut u64,
    now: Ms,
) -> Result<ApplyOutcome, ProcError> {
    let matches: Vec<Instantiation> = match_productions(wm, productions.iter(), |p| {
        p.role == Role::Application && p.operator.as_ref() == Some(operator)
    })
    .into_iter()
    .filter(|m| !refracted.contains(&m.key()))
    .collect();
    if matches.is_empty() {
        return Ok(ApplyOutcome::NoChange);
    }
    let levels = (wm.mode() == crate::wm::Mode::Soar).then(|| wm.levels());
    let mut fired = Vec::new();
    let mut creates: BTreeMap<Triple, InstId> = BTreeMap::new();
    let mut removes: BTreeSet<Triple> = BTreeSet::new();
    let mut clears: Vec<Symbol> = Vec::new();
    let mut commands = Vec::new();
    for m in &matches {
        let p = productions.get(&m.production).expect("matched production exists");
        let id = InstId(*next_inst);
        *next_inst += 1;
        refracted.insert(m.key());
        let mut record = record_for(p, m, id, describe(wm, &m.tested, levels.as_ref()), now);
        for effect in instantiate_actions(p, &m.bindings, id) {
            match effect {
                Effect::Remove(t) => {
                    removes.insert(t.clone());
                    record.removed.push(t);
                }
                Effect::Clear(b) => clears.push(b),
                Effect::Command(c) => {
                    record.commands.push(c.clone());
                    commands.push(c);
                }
                Effect::Prefer(p) => record.preferences.push(p),
                other => {
                    for t in other.created_triples() {
                        creates.entry(t.clone()).or_insert(id);
                        record.created.push(t);
                    }
                }
            }
        }
        fired.push(record);
    }
    for m in &matches {
        for t in &m.tested {
            wm.touch(*t, now)?;
        }
    }
    let before = wm.triples();
    let conflicts: Vec<Triple> = creates.keys().filter(|t| removes.contains(*t)).cloned().collect();
    for t in &removes {
        wm.remove_triple(t);
    }
    for (t, id) in &creates {
        if !removes.contains(t) {
            wm.add(t.clone(), crate::wm::Provenance::Rule(*id), now)?;
        }
    }
    let mut cleared = Vec::new();
    for b in clears {
        let chunks = wm.clear_buffer(&b)?;
        cleared.push((b, chunks));
    }
    let delta = WmDelta::between(&before, &wm.triples());
    Ok(ApplyOutcome::Applied { fired, delta, commands, cleared, conflicts })
}

//! The state-mode cycle: elaborate to a fixpoint, decide top-down, apply
//! or descend into an impasse.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::{Ms, Triple, Value};
use crate::error::RunError;
use crate::learning::{canonical, chunk_substate, preference_is_result, update_rl_soar, ChunkResult, SubstateTrace};
use crate::procedural::{apply_operator, decide, ApplyOutcome, Decision, FiredRecord, ImpasseKind, PrefKind};
use crate::symbol::Symbol;
use crate::wm::Provenance;

use super::actr::firing;
use super::trace::ImpasseEvent;
use super::Runtime;

fn operator_edge() -> Symbol {
    Symbol::named("operator")
}

fn selected_edge() -> Symbol {
    Symbol::named("selected")
}

impl Runtime {
    /// Returns `false` when the cycle changed nothing.
    pub(super) fn soar_cycle(&mut self) -> Result<bool, RunError> {
        let t = self.now;
        let before = self.wm.triples();
        let report = self.elab.run(&mut self.wm, &self.pm, &mut self.next_inst, t, self.config.max_waves)?;
        let mut changed = !report.fired.is_empty() || !report.retracted.is_empty();
        self.absorb(report.fired, t);
        self.reward_acc += self.take_rewards().into_iter().sum::<f64>();

        changed |= self.decide_levels(t)?;
        changed |= self.wm.triples() != before;
        Ok(changed)
    }

    /// Logs fired instantiations, keeps them for the backtrace while a
    /// substate exists, and learns from any that returned results.
    fn absorb(&mut self, fired: Vec<FiredRecord>, t: Ms) {
        for r in &fired {
            self.log.fired.push(firing(r));
            self.pm.record_firing(&r.production, t);
            for te in &r.tested {
                if let Some(src) = &te.copy_of {
                    self.sm.touch_slot(src, &te.triple.edge, &te.triple.value, t);
                }
            }
        }
        if self.wm.states().len() < 2 {
            return;
        }
        for r in &fired {
            self.substate_records.insert(r.id, r.clone());
        }
        if !(self.config.chunking && self.config.learning) {
            return;
        }
        for r in &fired {
            self.learn_from(r, t);
        }
    }

    fn learn_from(&mut self, r: &FiredRecord, t: Ms) {
        let Some(depth) = r.level.filter(|d| *d >= 1 && *d < self.wm.states().len()) else {
            return;
        };
        let levels = self.wm.levels();
        let mut results: Vec<ChunkResult> = Vec::new();
        for tr in &r.created {
            if levels.get(&tr.node).is_some_and(|l| *l < depth) {
                if let Some(id) = self.wm.find(tr) {
                    self.wm.make_persistent(id);
                }
                results.push(ChunkResult::Element(tr.clone()));
            }
        }
        let shallower: BTreeSet<Symbol> = self.wm.states()[..depth]
            .iter()
            .flat_map(|f| self.proposed_on(&f.node))
            .collect();
        for p in &r.preferences {
            if preference_is_result(p, &shallower) {
                results.push(ChunkResult::Preference(p.clone()));
            }
        }
        if results.is_empty() {
            return;
        }
        let frames = self.wm.states();
        let trace = SubstateTrace {
            records: &self.substate_records,
            productions: &self.pm,
            depth,
            watermark: frames[depth].watermark,
            superstate: frames[depth - 1].node.clone(),
            buffers: self.wm.buffers(),
        };
        match chunk_substate(&results, r.id, &trace, "chunk") {
            Ok(mut p) => {
                let key = canonical(&p);
                if self.canon.contains_key(&key) {
                    return;
                }
                let n = self.chunk_counts.entry(key.clone()).or_insert(0);
                *n += 1;
                if *n < self.config.chunk_gate {
                    return;
                }
                let name = self.fresh_rule_name("chunk");
                p.name = name.clone();
                self.canon.insert(key, name.clone());
                self.pm.add(p, self.config.utility.init_utility, t);
                self.learn_event("chunked", &name, vec![r.production.to_string()]);
            }
            Err(_) => {
                let rule = r.production.clone();
                self.learn_event("chunk-refused", &rule, Vec::new());
            }
        }
    }

    fn proposed_on(&self, state: &Symbol) -> Vec<Symbol> {
        let op = operator_edge();
        self.wm
            .on_node(state)
            .into_iter()
            .filter_map(|id| self.wm.get(id))
            .filter(|e| e.triple.edge == op)
            .filter_map(|e| e.triple.value.as_node().cloned())
            .collect()
    }

    fn selected_on(&self, state: &Symbol) -> Option<Symbol> {
        let sel = selected_edge();
        self.wm
            .on_node(state)
            .into_iter()
            .filter_map(|id| self.wm.get(id))
            .find(|e| e.triple.edge == sel)
            .and_then(|e| e.triple.value.as_node().cloned())
    }

    fn clear_selection(&mut self, state: &Symbol) -> bool {
        let sel = selected_edge();
        let ids: Vec<_> = self
            .wm
            .on_node(state)
            .into_iter()
            .filter(|id| self.wm.get(*id).is_some_and(|e| e.triple.edge == sel))
            .collect();
        let any = !ids.is_empty();
        for id in ids {
            let _ = self.wm.remove(id);
        }
        any
    }

    /// Removes every state below `level`, logging each.
    fn resolve_below(&mut self, level: usize) -> Result<bool, RunError> {
        let frames = self.wm.states();
        if frames.len() <= level + 1 {
            return Ok(false);
        }
        for f in frames[level + 1..].iter().rev() {
            self.log.impasses.push(ImpasseEvent {
                candidates: f.candidates.iter().map(|c| c.to_string()).collect(),
                event: "resolved".into(),
                kind: f.impasse.as_ref().map(|s| s.to_string()).unwrap_or_default(),
                state: f.node.to_string(),
            });
        }
        let node = frames[level + 1].node.clone();
        self.wm.resolve_substate(&node)?;
        if self.wm.states().len() == 1 {
            self.substate_records.clear();
        }
        Ok(true)
    }

    fn open_impasse(&mut self, kind: ImpasseKind, candidates: &[Symbol], t: Ms) -> Result<(), RunError> {
        if self.wm.states().len() > self.config.max_depth {
            return Err(RunError::SubstateDepth(self.config.max_depth));
        }
        let node = self.wm.create_substate(kind.symbol(), candidates, t)?;
        self.impasses_created += 1;
        self.log.impasses.push(ImpasseEvent {
            candidates: candidates.iter().map(|c| c.to_string()).collect(),
            event: "created".into(),
            kind: kind.word().into(),
            state: node.to_string(),
        });
        Ok(())
    }

    /// Decides at each level from the top down and acts at the first level
    /// whose situation is new. Returns whether anything happened.
    fn decide_levels(&mut self, t: Ms) -> Result<bool, RunError> {
        let mut level = 0;
        loop {
            let frame = self.wm.states()[level].clone();
            let proposed = self.proposed_on(&frame.node);
            let proposed_set: BTreeSet<&Symbol> = proposed.iter().collect();
            let mut prefs = Vec::new();
            let mut values: BTreeMap<Symbol, f64> = BTreeMap::new();
            let mut contributors: BTreeMap<Symbol, Vec<Symbol>> = BTreeMap::new();
            for (_, rule, p) in self.elab.preferences() {
                if !proposed_set.contains(&p.operator) {
                    continue;
                }
                let rl = self.pm.get(&rule).is_some_and(|r| r.rl);
                if rl && p.kind == PrefKind::Indifferent && p.other.is_none() {
                    *values.entry(p.operator.clone()).or_insert(0.0) += self.pm.utility(&rule);
                    contributors.entry(p.operator.clone()).or_default().push(rule.clone());
                }
                prefs.push(p);
            }
            let decision = decide(&proposed, &prefs, &values, self.config.temperature, &mut self.rng);
            let below = self.wm.states().get(level + 1).cloned();
            match decision {
                Decision::Selected { operator, .. } => {
                    let current = self.selected_on(&frame.node);
                    let waiting = below.as_ref().is_some_and(|b| {
                        b.impasse == Some(ImpasseKind::OperatorNoChange.symbol()) && b.candidates == [operator.clone()]
                    });
                    if current.as_ref() == Some(&operator) && waiting {
                        if self.apply(&operator, t)? {
                            self.resolve_below(level)?;
                            self.clear_selection(&frame.node);
                            return Ok(true);
                        }
                        level += 1;
                        continue;
                    }
                    self.resolve_below(level)?;
                    self.clear_selection(&frame.node);
                    self.refracted.clear();
                    let sel = Triple::new(frame.node.clone(), selected_edge(), Value::Node(operator.clone()));
                    self.wm.add(sel, Provenance::Architecture, t)?;
                    if level == 0 {
                        let q = values.get(&operator).copied().unwrap_or(0.0);
                        let contrib = contributors.remove(&operator).unwrap_or_default();
                        self.rl_update(Some(q), contrib);
                    }
                    if self.apply(&operator, t)? {
                        self.clear_selection(&frame.node);
                    } else {
                        self.open_impasse(ImpasseKind::OperatorNoChange, &[operator], t)?;
                    }
                    return Ok(true);
                }
                Decision::Impasse { kind, candidates } => {
                    let same = below
                        .as_ref()
                        .is_some_and(|b| b.impasse == Some(kind.symbol()) && b.candidates == candidates);
                    if same {
                        level += 1;
                        continue;
                    }
                    let snc = ImpasseKind::StateNoChange.symbol();
                    let idle = kind == ImpasseKind::StateNoChange
                        && candidates.is_empty()
                        && frame.impasse.as_ref() == Some(&snc)
                        && frame.candidates.is_empty();
                    let mut changed = self.resolve_below(level)?;
                    changed |= self.clear_selection(&frame.node);
                    if idle {
                        return Ok(changed);
                    }
                    self.open_impasse(kind, &candidates, t)?;
                    return Ok(true);
                }
            }
        }
    }

    /// Fires the application rules for `op`. `false` means none matched.
    fn apply(&mut self, op: &Symbol, t: Ms) -> Result<bool, RunError> {
        let out = apply_operator(&mut self.wm, &self.pm, op, &mut self.refracted, &mut self.next_inst, t)?;
        let ApplyOutcome::Applied { fired, commands, .. } = out else {
            return Ok(false);
        };
        self.absorb(fired, t);
        let t_end = t + self.config.cycle_ms;
        for c in commands {
            self.command(c, t_end)?;
        }
        self.reward_acc += self.take_rewards().into_iter().sum::<f64>();
        Ok(true)
    }

    /// Temporal-difference step for the rules behind the previous top-level
    /// selection, using the reward gathered since then. `q_next` is `None`
    /// at the end of the run.
    pub(super) fn rl_update(&mut self, q_next: Option<f64>, contributors: Vec<Symbol>) {
        if self.config.learning {
            if let Some((q_prev, prev)) = self.rl_prev.take() {
                let u = &self.config.utility;
                let deltas = update_rl_soar(&mut self.pm, &prev, q_prev, self.reward_acc, q_next, u.alpha, u.gamma);
                self.utility_events(deltas);
            }
        }
        self.reward_acc = 0.0;
        self.rl_prev = q_next.map(|q| (q, contributors));
    }
}

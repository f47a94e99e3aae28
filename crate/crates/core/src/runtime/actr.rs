//! The buffer-mode cycle: match, select one instantiation, fire.

use crate::error::RunError;
use crate::learning::{absorb_duplicate, canonical, compile_pair, update_utilities_actr, RewardEvent, RewardSource};
use crate::procedural::{fire, match_productions, select_actr, FiredRecord, Role};
use crate::wm::Mode;

use super::trace::Firing;
use super::Runtime;

pub(super) fn firing(r: &FiredRecord) -> Firing {
    Firing {
        bindings: r.bindings.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        production: r.production.to_string(),
    }
}

impl Runtime {
    /// Returns `false` when no rule matched.
    pub(super) fn actr_cycle(&mut self) -> Result<bool, RunError> {
        let t = self.now;
        let t_end = t + self.config.cycle_ms;
        let matches = match_productions(&self.wm, self.pm.iter(), |p| p.role == Role::Plain);
        if matches.is_empty() {
            return Ok(false);
        }
        let candidates: Vec<(&str, f64)> =
            matches.iter().map(|m| (m.production.as_str(), self.pm.utility(&m.production))).collect();
        let pick = select_actr(&candidates, self.config.utility.noise, &mut self.rng).expect("non-empty");
        let inst = &matches[pick];
        let p = self.pm.get(&inst.production).expect("matched rule exists").clone();
        let id = self.inst_id();
        let Some(out) = fire(&mut self.wm, &p, inst, id, t)? else {
            return Ok(false);
        };
        self.pm.record_firing(&p.name, t);
        self.reward_history.push((p.name.clone(), t));
        self.log.fired.push(firing(&out.record));

        for (buffer, chunks) in out.cleared {
            self.store_cleared(&buffer, chunks, t_end);
        }
        for c in out.commands {
            self.command(c, t_end)?;
        }
        // a rule-made reward arrives with the firing, so its delay is zero
        for amount in self.take_rewards() {
            self.actr_reward(amount, t, RewardSource::RuleCreated);
        }
        if self.config.compile && self.config.learning {
            if let Some(prev) = self.last_fired.take() {
                self.try_compile(&prev, &out.record, t);
            }
        }
        self.last_fired = Some(out.record);
        Ok(true)
    }

    pub(super) fn actr_reward(&mut self, amount: f64, at: crate::data::Ms, source: RewardSource) {
        if !self.config.learning {
            self.reward_history.clear();
            return;
        }
        let ev = RewardEvent { amount, at, source };
        let deltas = update_utilities_actr(&mut self.pm, &mut self.reward_history, &ev, self.config.utility.alpha);
        self.utility_events(deltas);
    }

    fn try_compile(&mut self, r1: &FiredRecord, r2: &FiredRecord, now: crate::data::Ms) {
        let (Some(p1), Some(p2)) = (self.pm.get(&r1.production).cloned(), self.pm.get(&r2.production).cloned()) else {
            return;
        };
        let Ok(mut p) = compile_pair(&p1, r1, &p2, r2, "compiled", self.config.utility.init_utility) else {
            return;
        };
        let parents = vec![p1.name.to_string(), p2.name.to_string()];
        let key = canonical(&p);
        match self.canon.get(&key).cloned() {
            Some(existing) => {
                let learned = self.pm.get(&existing).is_some_and(|e| e.origin != crate::procedural::Origin::HandWritten);
                if learned {
                    let u1 = self.pm.utility(&p1.name);
                    let d = absorb_duplicate(&mut self.pm, &existing, u1, self.config.utility.alpha);
                    if let Some(m) = self.pm.meta_mut(&existing) {
                        m.learned += 1;
                    }
                    self.log.learning.push(super::LearningEvent {
                        after: Some(d.after),
                        before: Some(d.before),
                        kind: "recompiled".into(),
                        parents,
                        rule: existing.to_string(),
                    });
                }
            }
            None => {
                let name = self.fresh_rule_name("compiled");
                p.name = name.clone();
                self.canon.insert(key, name.clone());
                self.pm.add(p, self.config.utility.init_utility, now);
                if let Some(m) = self.pm.meta_mut(&name) {
                    m.parents = Some((p1.name.clone(), p2.name.clone()));
                }
                self.learn_event("compiled", &name, parents);
            }
        }
    }

    /// Cleared buffer chunks go to declarative memory (buffer mode only).
    pub(super) fn store_cleared(&mut self, buffer: &crate::symbol::Symbol, chunks: Vec<crate::data::Chunk>, at: crate::data::Ms) {
        if self.config.mode != Mode::Actr || buffer.as_str() == "reward" {
            return;
        }
        for c in chunks {
            let slots = c.slots();
            if slots.is_empty() {
                continue;
            }
            let name = if self.wm.is_buffer(c.name()) {
                crate::symbol::Symbol::named(&format!("{}-chunk", c.name()))
            } else {
                c.name().clone()
            };
            let _ = self.sm.store_chunk(Mode::Actr, &name, slots, at, crate::declarative::StoreCause::BufferCleared);
        }
    }
}

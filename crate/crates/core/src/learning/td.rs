//! Utility learning from reward: the ACT-R style per-rule update with a
//! delay discount, and the Soar style TD update over operator values.

use serde::Serialize;

use crate::data::Ms;
use crate::procedural::ProceduralMemory;
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    pub alpha: f64,
    /// Selection noise scale.
    pub noise: f64,
    pub gamma: f64,
    /// Utility given to newly learned rules.
    pub init_utility: f64,
}

impl UtilityParams {
    pub fn actr() -> Self {
        UtilityParams { alpha: 0.2, noise: 0.25, gamma: 0.0, init_utility: 0.0 }
    }

    pub fn soar() -> Self {
        UtilityParams { alpha: 0.3, noise: 0.25, gamma: 0.9, init_utility: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardSource {
    RuleCreated,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardEvent {
    pub amount: f64,
    pub at: Ms,
    pub source: RewardSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityDelta {
    pub rule: Symbol,
    pub before: f64,
    pub after: f64,
}

/// `u + alpha * (target - u)`.
pub fn td_toward(u: f64, target: f64, alpha: f64) -> f64 {
    u + alpha * (target - u)
}

/// Rewards every rule fired since the last reward. Each firing is
/// discounted by its distance from the reward in seconds. `history` is
/// drained.
pub fn update_utilities_actr(
    pm: &mut ProceduralMemory,
    history: &mut Vec<(Symbol, Ms)>,
    reward: &RewardEvent,
    alpha: f64,
) -> Vec<UtilityDelta> {
    let mut out = Vec::new();
    for (rule, fired_at) in history.drain(..) {
        if !pm.contains(&rule) {
            continue;
        }
        let delay_s = reward.at.saturating_sub(fired_at) as f64 / 1000.0;
        let r = reward.amount - delay_s;
        let before = pm.utility(&rule);
        let after = td_toward(before, r, alpha);
        pm.set_utility(&rule, after);
        out.push(UtilityDelta { rule, before, after });
    }
    out
}

/// `q_prev + alpha * (r + gamma * q_curr - q_prev)`; pass `q_curr = None`
/// at the end of an episode.
pub fn td_target(q_prev: f64, r: f64, q_curr: Option<f64>, alpha: f64, gamma: f64) -> f64 {
    q_prev + alpha * (r + gamma * q_curr.unwrap_or(0.0) - q_prev)
}

/// Applies the TD update to the rules that supplied the previous operator's
/// value. The change is split evenly across them, so the summed value moves
/// by exactly the TD step.
pub fn update_rl_soar(
    pm: &mut ProceduralMemory,
    contributors: &[Symbol],
    q_prev: f64,
    r: f64,
    q_curr: Option<f64>,
    alpha: f64,
    gamma: f64,
) -> Vec<UtilityDelta> {
    if contributors.is_empty() {
        return Vec::new();
    }
    let step = td_target(q_prev, r, q_curr, alpha, gamma) - q_prev;
    let share = step / contributors.len() as f64;
    let present: Vec<&Symbol> = contributors.iter().filter(|rule| pm.contains(rule)).collect();
    present
        .into_iter()
        .map(|rule| {
            let before = pm.utility(rule);
            let after = before + share;
            pm.set_utility(rule, after);
            UtilityDelta { rule: rule.clone(), before, after }
        })
        .collect()
}

/// Moves an existing learned rule's utility toward that of the first parent
/// of a pair that compiled into it again.
pub fn absorb_duplicate(pm: &mut ProceduralMemory, existing: &Symbol, parent1_utility: f64, alpha: f64) -> UtilityDelta {
    let before = pm.utility(existing);
    let after = td_toward(before, parent1_utility, alpha);
    pm.set_utility(existing, after);
    if let Some(m) = pm.meta_mut(existing) {
        m.learned += 1;
    }
    UtilityDelta { rule: existing.clone(), before, after }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedural::{Production, Role};

    fn pm_with(name: &str, u: f64) -> ProceduralMemory {
        let mut pm = ProceduralMemory::new();
        pm.add(Production::new(name, Role::Plain, vec![], vec![]), u, 0);
        pm
    }

    fn reward(amount: f64, at: Ms) -> RewardEvent {
        RewardEvent { amount, at, source: RewardSource::External }
    }

    #[test]
    fn delayed_reward() {
        let mut pm = pm_with("r", 0.0);
        let mut h = vec![(Symbol::named("r"), 1000)];
        let d = update_utilities_actr(&mut pm, &mut h, &reward(10.0, 2000), 0.2);
        assert!((d[0].after - 1.8).abs() < 1e-12);
        assert!(h.is_empty());
    }

    #[test]
    fn immediate_reward_and_empty_history() {
        let mut pm = pm_with("r", 0.0);
        let mut h = vec![(Symbol::named("r"), 500)];
        update_utilities_actr(&mut pm, &mut h, &reward(10.0, 500), 0.2);
        assert!((pm.utility(&Symbol::named("r")) - 2.0).abs() < 1e-12);
        assert!(update_utilities_actr(&mut pm, &mut h, &reward(10.0, 600), 0.2).is_empty());
    }

    #[test]
    fn soar_td() {
        assert!((td_target(0.0, 1.0, Some(0.0), 0.3, 0.9) - 0.3).abs() < 1e-12);
        assert_eq!(td_target(0.5, 0.0, Some(0.5), 0.3, 1.0), 0.5);
        let mut q = 0.0;
        for _ in 0..20 {
            q = td_target(q, 1.0, None, 0.3, 0.0);
        }
        assert!((q - (1.0 - 0.7f64.powi(20))).abs() < 1e-12);
        assert!((q - 1.0).abs() < 0.01);
    }

    #[test]
    fn split_across_contributors() {
        let mut pm = pm_with("a", 0.25);
        pm.add(Production::new("b", Role::Evaluation, vec![], vec![]), 0.25, 0);
        let names = [Symbol::named("a"), Symbol::named("b")];
        update_rl_soar(&mut pm, &names, 0.5, 1.0, None, 0.3, 0.9);
        let q = pm.utility(&names[0]) + pm.utility(&names[1]);
        assert!((q - 0.65).abs() < 1e-12);
    }

    #[test]
    fn absorb() {
        let mut pm = pm_with("c", 0.0);
        let d = absorb_duplicate(&mut pm, &Symbol::named("c"), 5.0, 0.2);
        assert!((d.after - 1.0).abs() < 1e-12);
        let mut pm = pm_with("c", 5.0);
        assert_eq!(absorb_duplicate(&mut pm, &Symbol::named("c"), 5.0, 0.2).after, 5.0);
        let mut pm = pm_with("c", 0.0);
        for n in 1..=30 {
            let u = absorb_duplicate(&mut pm, &Symbol::named("c"), 5.0, 0.2).after;
            assert!((u - 5.0 * (1.0 - 0.8f64.powi(n))).abs() < 1e-9);
            assert!(u <= 5.0);
        }
    }
}

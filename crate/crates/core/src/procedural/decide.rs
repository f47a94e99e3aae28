//! Operator selection from proposals and preferences.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::procedural::PrefKind;
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpasseKind {
    StateNoChange,
    Tie,
    Conflict,
    OperatorNoChange,
}

impl ImpasseKind {
    pub fn word(self) -> &'static str {
        match self {
            ImpasseKind::StateNoChange => "state-no-change",
            ImpasseKind::Tie => "tie",
            ImpasseKind::Conflict => "conflict",
            ImpasseKind::OperatorNoChange => "operator-no-change",
        }
    }

    pub fn symbol(self) -> Symbol {
        Symbol::raw(self.word())
    }
}

/// A preference on an operator candidate, as produced by an evaluation rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Preference {
    pub operator: Symbol,
    pub kind: PrefKind,
    /// The other candidate of a `better`/`worse` preference.
    pub other: Option<Symbol>,
}

impl Preference {
    pub fn unary(operator: &str, kind: PrefKind) -> Preference {
        Preference { operator: Symbol::named(operator), kind, other: None }
    }

    pub fn binary(operator: &str, kind: PrefKind, other: &str) -> Preference {
        Preference { operator: Symbol::named(operator), kind, other: Some(Symbol::named(other)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    /// `pool` is the final candidate set; more than one member means the
    /// choice was made by the seeded softmax over indifferent candidates.
    Selected { operator: Symbol, pool: Vec<Symbol> },
    Impasse { kind: ImpasseKind, candidates: Vec<Symbol> },
}

/// Resolves preferences over the proposed candidates.
///
/// Steps, in order: drop rejected; keep only best-marked when any remain;
/// `better`/`worse` form a dominance relation (a cycle is a conflict,
/// otherwise dominated candidates drop); drop worst-marked unless nothing
/// else would remain. One survivor is selected; several survivors that
/// are all indifferent are chosen between by softmax over `values`; any
/// other multi-way result is a tie; none left is a state-no-change.
pub fn decide<R: Rng + ?Sized>(
    proposed: &[Symbol],
    preferences: &[Preference],
    values: &BTreeMap<Symbol, f64>,
    temperature: f64,
    rng: &mut R,
) -> Decision {
    let has = |op: &Symbol, kind: PrefKind| {
        preferences.iter().any(|p| p.kind == kind && &p.operator == op)
    };
    let mut pool: BTreeSet<Symbol> = proposed.iter().cloned().collect();
    pool.extend(
        preferences
            .iter()
            .filter(|p| p.kind == PrefKind::Acceptable)
            .map(|p| p.operator.clone()),
    );
    pool.retain(|o| !has(o, PrefKind::Reject));
    if pool.is_empty() {
        return Decision::Impasse { kind: ImpasseKind::StateNoChange, candidates: Vec::new() };
    }

    let best: BTreeSet<Symbol> = pool.iter().filter(|o| has(o, PrefKind::Best)).cloned().collect();
    if !best.is_empty() {
        pool = best;
    }

    // dominance edges a -> b meaning a beats b
    let mut beats: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for p in preferences {
        let Some(other) = &p.other else { continue };
        let (winner, loser) = match p.kind {
            PrefKind::Better => (&p.operator, other),
            PrefKind::Worse => (other, &p.operator),
            _ => continue,
        };
        if winner != loser && pool.contains(winner) && pool.contains(loser) {
            beats.entry(winner.clone()).or_default().insert(loser.clone());
        }
    }
    let cyclic = cyclic_members(&pool, &beats);
    if !cyclic.is_empty() {
        return Decision::Impasse { kind: ImpasseKind::Conflict, candidates: cyclic };
    }
    let dominated: BTreeSet<Symbol> = beats.values().flatten().cloned().collect();
    pool.retain(|o| !dominated.contains(o));

    let non_worst: BTreeSet<Symbol> = pool.iter().filter(|o| !has(o, PrefKind::Worst)).cloned().collect();
    if !non_worst.is_empty() {
        pool = non_worst;
    }

    let pool: Vec<Symbol> = pool.into_iter().collect();
    if pool.len() == 1 {
        return Decision::Selected { operator: pool[0].clone(), pool };
    }
    if pool.iter().all(|o| has(o, PrefKind::Indifferent)) {
        let operator = softmax_pick(&pool, values, temperature, rng);
        return Decision::Selected { operator, pool };
    }
    Decision::Impasse { kind: ImpasseKind::Tie, candidates: pool }
}

/// Members of some directed cycle, found with Tarjan's algorithm.
fn cyclic_members(pool: &BTreeSet<Symbol>, beats: &BTreeMap<Symbol, BTreeSet<Symbol>>) -> Vec<Symbol> {
    struct Tarjan<'a> {
        beats: &'a BTreeMap<Symbol, BTreeSet<Symbol>>,
        index: BTreeMap<&'a Symbol, usize>,
        low: BTreeMap<&'a Symbol, usize>,
        stack: Vec<&'a Symbol>,
        on_stack: BTreeSet<&'a Symbol>,
        next: usize,
        out: BTreeSet<Symbol>,
    }
    impl<'a> Tarjan<'a> {
        fn visit(&mut self, v: &'a Symbol) {
            self.index.insert(v, self.next);
            self.low.insert(v, self.next);
            self.next += 1;
            self.stack.push(v);
            self.on_stack.insert(v);
            if let Some(succ) = self.beats.get(v) {
                for w in succ {
                    if !self.index.contains_key(w) {
                        self.visit(w);
                        let lw = self.low[w];
                        let lv = self.low.get_mut(v).unwrap();
                        *lv = (*lv).min(lw);
                    } else if self.on_stack.contains(w) {
                        let iw = self.index[w];
                        let lv = self.low.get_mut(v).unwrap();
                        *lv = (*lv).min(iw);
                    }
                }
            }
            if self.low[v] == self.index[v] {
                let mut component = Vec::new();
                loop {
                    let w = self.stack.pop().unwrap();
                    self.on_stack.remove(w);
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                if component.len() > 1 {
                    self.out.extend(component.into_iter().cloned());
                }
            }
        }
    }
    let mut t = Tarjan {
        beats,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: BTreeSet::new(),
    };
    for v in pool {
        if !t.index.contains_key(v) {
            t.visit(v);
        }
    }
    t.out.into_iter().collect()
}

fn softmax_pick<R: Rng + ?Sized>(
    pool: &[Symbol],
    values: &BTreeMap<Symbol, f64>,
    temperature: f64,
    rng: &mut R,
) -> Symbol {
    let q: Vec<f64> = pool.iter().map(|o| values.get(o).copied().unwrap_or(0.0)).collect();
    if temperature <= 0.0 {
        // greedy, first in name order on ties
        let mut best = 0;
        for i in 1..q.len() {
            if q[i] > q[best] {
                best = i;
            }
        }
        return pool[best].clone();
    }
    let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = q.iter().map(|v| ((v - max) / temperature).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return pool[i].clone();
        }
        draw -= w;
    }
    pool[pool.len() - 1].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn syms(xs: &[&str]) -> Vec<Symbol> {
        xs.iter().map(|x| Symbol::named(x)).collect()
    }

    fn run(proposed: &[&str], prefs: &[Preference]) -> Decision {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        decide(&syms(proposed), prefs, &BTreeMap::new(), 0.25, &mut rng)
    }

    #[test]
    fn singleton() {
        assert_eq!(
            run(&["o1"], &[]),
            Decision::Selected { operator: Symbol::named("o1"), pool: syms(&["o1"]) }
        );
    }

    #[test]
    fn better_wins() {
        let d = run(&["o1", "o2"], &[Preference::binary("o1", PrefKind::Better, "o2")]);
        assert!(matches!(d, Decision::Selected { operator, .. } if operator.as_str() == "o1"));
        let d = run(&["o1", "o2"], &[Preference::binary("o1", PrefKind::Worse, "o2")]);
        assert!(matches!(d, Decision::Selected { operator, .. } if operator.as_str() == "o2"));
    }

    #[test]
    fn tie_and_no_change() {
        assert_eq!(
            run(&["o1", "o2"], &[]),
            Decision::Impasse { kind: ImpasseKind::Tie, candidates: syms(&["o1", "o2"]) }
        );
        assert_eq!(run(&[], &[]), Decision::Impasse { kind: ImpasseKind::StateNoChange, candidates: vec![] });
        assert_eq!(
            run(&["o1"], &[Preference::unary("o1", PrefKind::Reject)]),
            Decision::Impasse { kind: ImpasseKind::StateNoChange, candidates: vec![] }
        );
    }

    #[test]
    fn cycle_is_conflict() {
        let d = run(
            &["o1", "o2", "o3"],
            &[
                Preference::binary("o1", PrefKind::Better, "o2"),
                Preference::binary("o2", PrefKind::Better, "o1"),
            ],
        );
        assert_eq!(d, Decision::Impasse { kind: ImpasseKind::Conflict, candidates: syms(&["o1", "o2"]) });
    }

    #[test]
    fn worst_is_fallback() {
        let d = run(&["o1"], &[Preference::unary("o1", PrefKind::Worst)]);
        assert!(matches!(d, Decision::Selected { .. }));
        let d = run(&["o1", "o2"], &[Preference::unary("o1", PrefKind::Worst)]);
        assert!(matches!(d, Decision::Selected { operator, .. } if operator.as_str() == "o2"));
    }

    #[test]
    fn indifferent_softmax_is_seeded() {
        let prefs = [Preference::unary("a", PrefKind::Indifferent), Preference::unary("b", PrefKind::Indifferent)];
        let values = BTreeMap::from([(Symbol::named("a"), 1.0), (Symbol::named("b"), 0.0)]);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| decide(&syms(&["a", "b"]), &prefs, &values, 0.25, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        let picks_a = draw(9)
            .iter()
            .filter(|d| matches!(d, Decision::Selected { operator, .. } if operator.as_str() == "a"))
            .count();
        assert!(picks_a > 40);
    }
}

//! Spreading activation from the current context to stored chunks.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::Ms;
use crate::declarative::semantic::SemanticStore;
use crate::symbol::Symbol;

/// Associative strength `S - ln(fan)`, floored at zero.
pub fn fan_strength(s: f64, fan: usize) -> f64 {
    if fan == 0 {
        return 0.0;
    }
    (s - (fan as f64).ln()).max(0.0)
}

/// One-level spread: every source shares weight `1/|sources|` and adds
/// `W * (S - ln fan)` to each stored chunk that has it as a value.
pub fn spread_actr(sources: &BTreeSet<Symbol>, sm: &SemanticStore, s: f64) -> BTreeMap<Symbol, f64> {
    let mut out: BTreeMap<Symbol, f64> = sm.chunks().map(|c| (c.name.clone(), 0.0)).collect();
    if sources.is_empty() {
        return out;
    }
    let w = 1.0 / sources.len() as f64;
    for j in sources {
        let holders: Vec<&Symbol> = sm
            .chunks()
            .filter(|c| c.symbol_values().any(|v| v == j))
            .map(|c| &c.name)
            .collect();
        let sji = fan_strength(s, holders.len());
        for i in holders {
            *out.get_mut(i).expect("chunk present") += w * sji;
        }
    }
    out
}

/// Per-hop attenuation of multi-level spread.
pub const HOP_DECAY: f64 = 0.5;

/// Weights of a chunk's links to other stored chunks, normalized to sum
/// to one. A link's raw weight is the recency sum of its slot's access
/// history, or 1 when the slot has never been accessed.
pub fn link_weights(sm: &SemanticStore, from: &Symbol, now: Ms, decay: f64) -> Vec<(Symbol, f64)> {
    let Some(c) = sm.get(from) else { return Vec::new() };
    let mut raw: Vec<(Symbol, f64)> = Vec::new();
    for (edge, value) in &c.slots {
        let Some(target) = value.as_symbol() else { continue };
        if sm.get(target).is_none() || target == from {
            continue;
        }
        let r = match c.slot_accesses.get(&(edge.clone(), value.clone())) {
            Some(h) if !h.is_empty() => crate::activation::bla(h, now, decay).exp(),
            _ => 1.0,
        };
        raw.push((target.clone(), r));
    }
    let total: f64 = raw.iter().map(|(_, r)| r).sum();
    if total > 0.0 {
        for (_, r) in raw.iter_mut() {
            *r /= total;
        }
    }
    raw
}

/// Multi-level spread from stored chunks that have copies in working
/// memory. Each source starts with 1; a hop to a linked chunk multiplies
/// by the link weight and by [`HOP_DECAY`]. Contributions over all walks of
/// length 1..=depth are summed.
pub fn spread_soar(
    sources: &BTreeSet<Symbol>,
    sm: &SemanticStore,
    depth: u32,
    now: Ms,
    decay: f64,
) -> BTreeMap<Symbol, f64> {
    let mut out: BTreeMap<Symbol, f64> = sm.chunks().map(|c| (c.name.clone(), 0.0)).collect();
    let mut weights: BTreeMap<Symbol, Vec<(Symbol, f64)>> = BTreeMap::new();
    for source in sources.iter().filter(|s| sm.get(s).is_some()) {
        let mut frontier: BTreeMap<Symbol, f64> = BTreeMap::from([(source.clone(), 1.0)]);
        for _ in 0..depth {
            let mut next: BTreeMap<Symbol, f64> = BTreeMap::new();
            for (node, amount) in &frontier {
                let links = weights.entry(node.clone()).or_insert_with(|| link_weights(sm, node, now, decay));
                for (target, w) in links.iter() {
                    *next.entry(target.clone()).or_default() += amount * w * HOP_DECAY;
                }
            }
            for (n, a) in &next {
                *out.get_mut(n).expect("chunk present") += a;
            }
            frontier = next;
        }
    }
    out
}

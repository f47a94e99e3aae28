//! Cue-based retrieval, blending, and spontaneous retrieval.

use std::collections::BTreeMap;

use rand::Rng;

use crate::data::{Ms, Value};
use crate::declarative::semantic::{SemanticStore, Slots, StoredChunk};
use crate::procedural::{logistic_noise, symbols_equal, CueTest};
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalParams {
    pub decay: f64,
    pub threshold: f64,
    pub spontaneous_threshold: f64,
    /// Latency factor in milliseconds.
    pub latency_factor: f64,
    /// Maximum associative strength.
    pub assoc_strength: f64,
    /// Hops of multi-level spread.
    pub depth: u32,
    pub temperature: f64,
    /// Chunks retrieved within this many ms are not candidates; 0 disables.
    pub inhibition_window: Ms,
    pub noise: f64,
    /// Treat cue tests as soft, each violation costing `mismatch_penalty`.
    pub partial_matching: bool,
    pub mismatch_penalty: f64,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams {
            decay: 0.5,
            threshold: 0.0,
            spontaneous_threshold: 2.0,
            latency_factor: 1000.0,
            assoc_strength: 2.0,
            depth: 1,
            temperature: 1.0,
            inhibition_window: 0,
            noise: 0.0,
            partial_matching: false,
            mismatch_penalty: 1.0,
        }
    }
}

/// A retrieval cue: a list of slot constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cue {
    pub constraints: Vec<(Symbol, CueTest<Value>)>,
}

impl Cue {
    pub fn new(constraints: Vec<(Symbol, CueTest<Value>)>) -> Cue {
        Cue { constraints }
    }

    /// Number of constraints the chunk violates.
    pub fn violations(&self, chunk: &StoredChunk) -> usize {
        self.constraints.iter().filter(|(edge, test)| !holds(chunk, edge, test)).count()
    }

    pub fn matches(&self, chunk: &StoredChunk) -> bool {
        self.violations(chunk) == 0
    }
}

fn holds(chunk: &StoredChunk, edge: &Symbol, test: &CueTest<Value>) -> bool {
    let values: Vec<&Value> = chunk.slots.iter().filter(|(e, _)| e == edge).map(|(_, v)| v).collect();
    let num = |f: fn(f64, f64) -> bool, operand: &Value| {
        values.iter().any(|v| matches!((v.as_num(), operand.as_num()), (Some(a), Some(b)) if f(a, b)))
    };
    match test {
        CueTest::Present => !values.is_empty(),
        CueTest::Eq(v) => values.iter().any(|x| symbols_equal(x, v)),
        CueTest::Ne(v) => !values.iter().any(|x| symbols_equal(x, v)),
        CueTest::Lt(v) => num(|a, b| a < b, v),
        CueTest::Gt(v) => num(|a, b| a > b, v),
        CueTest::Le(v) => num(|a, b| a <= b, v),
        CueTest::Ge(v) => num(|a, b| a >= b, v),
    }
}

/// `ceil(F * e^-A)` milliseconds.
pub fn latency(activation: f64, factor: f64) -> Ms {
    let ms = (factor * (-activation).exp()).ceil();
    if ms.is_nan() || ms < 0.0 {
        0
    } else {
        ms.min(1e12) as Ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RetrievalOutcome {
    Success { chunk: StoredChunk, activation: f64, latency: Ms },
    Failure { latency: Ms },
}

/// Candidate chunks with their activation (base level + spread + noise,
/// minus mismatch penalties), in name order. One noise draw per candidate.
pub fn score_candidates<R: Rng + ?Sized>(
    sm: &SemanticStore,
    cue: &Cue,
    params: &RetrievalParams,
    spread: &BTreeMap<Symbol, f64>,
    now: Ms,
    rng: &mut R,
) -> Vec<(Symbol, f64)> {
    let inhibited = |c: &StoredChunk| {
        params.inhibition_window > 0
            && c.last_retrieved.is_some_and(|t| now.saturating_sub(t) < params.inhibition_window)
    };
    sm.chunks()
        .filter(|c| !inhibited(c))
        .filter_map(|c| {
            let misses = cue.violations(c);
            if misses > 0 && !params.partial_matching {
                return None;
            }
            let a = crate::activation::bla(&c.accesses, now, params.decay)
                + spread.get(&c.name).copied().unwrap_or(0.0)
                - params.mismatch_penalty * misses as f64;
            Some((c.name.clone(), a))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(n, a)| (n, a + logistic_noise(rng, params.noise)))
        .collect()
}

/// Highest activation; ties go to the first name.
fn argmax(scored: &[(Symbol, f64)]) -> Option<&(Symbol, f64)> {
    scored.iter().fold(None, |best: Option<&(Symbol, f64)>, x| match best {
        Some(b) if b.1 >= x.1 => Some(b),
        _ => Some(x),
    })
}

/// Retrieves the most active chunk that satisfies the cue. On success the
/// chunk's access history gains `now`.
pub fn retrieve<R: Rng + ?Sized>(
    sm: &mut SemanticStore,
    cue: &Cue,
    params: &RetrievalParams,
    spread: &BTreeMap<Symbol, f64>,
    now: Ms,
    rng: &mut R,
) -> RetrievalOutcome {
    let scored = score_candidates(sm, cue, params, spread, now, rng);
    match argmax(&scored) {
        Some((name, a)) if *a >= params.threshold => {
            let (name, a) = (name.clone(), *a);
            let chunk = sm.get(&name).expect("scored chunk exists").clone();
            sm.mark_retrieved(&name, now);
            RetrievalOutcome::Success { chunk, activation: a, latency: latency(a, params.latency_factor) }
        }
        _ => RetrievalOutcome::Failure { latency: latency(params.threshold, params.latency_factor) },
    }
}

/// Blends every chunk that satisfies the cue. Numeric slots present as
/// numbers in all matches are averaged with weights `e^(A/t)`; other
/// slots take the value of the heaviest chunk that has them. Returns the
/// slots and the activation used for latency (the best match's).
pub fn blend<R: Rng + ?Sized>(
    sm: &SemanticStore,
    cue: &Cue,
    params: &RetrievalParams,
    spread: &BTreeMap<Symbol, f64>,
    now: Ms,
    rng: &mut R,
) -> Option<(Slots, f64)> {
    let scored = score_candidates(sm, cue, params, spread, now, rng);
    let &(_, best) = argmax(&scored)?;
    let t = if params.temperature > 0.0 { params.temperature } else { 1.0 };
    let raw: Vec<f64> = scored.iter().map(|(_, a)| ((a - best) / t).exp()).collect();
    let total: f64 = raw.iter().sum();
    let chunks: Vec<(&StoredChunk, f64)> = scored
        .iter()
        .zip(&raw)
        .map(|((n, _), w)| (sm.get(n).expect("scored chunk exists"), w / total))
        .collect();

    let mut edges: Vec<&Symbol> = chunks.iter().flat_map(|(c, _)| c.slots.iter().map(|(e, _)| e)).collect();
    edges.sort();
    edges.dedup();
    let mut out = Vec::new();
    for edge in edges {
        let values: Vec<(&Value, f64)> =
            chunks.iter().filter_map(|(c, w)| c.get(edge.as_str()).map(|v| (v, *w))).collect();
        let all_numeric = values.len() == chunks.len() && values.iter().all(|(v, _)| v.as_num().is_some());
        let value = if all_numeric {
            Value::Num(values.iter().map(|(v, w)| v.as_num().unwrap() * w).sum())
        } else {
            let mut heaviest = values[0];
            for v in &values[1..] {
                if v.1 > heaviest.1 {
                    heaviest = *v;
                }
            }
            heaviest.0.clone()
        };
        out.push((edge.clone(), value));
    }
    Some((out, best))
}

/// The chunk with the highest base-level activation, if the retrieval
/// buffer is empty and that activation exceeds the spontaneous threshold.
pub fn spontaneous(sm: &SemanticStore, buffer_empty: bool, params: &RetrievalParams, now: Ms) -> Option<Symbol> {
    if !buffer_empty {
        return None;
    }
    let scored: Vec<(Symbol, f64)> =
        sm.chunks().map(|c| (c.name.clone(), sm.base_level(&c.name, now, params.decay))).collect();
    argmax(&scored).filter(|(_, a)| *a > params.spontaneous_threshold).map(|(n, _)| n.clone())
}

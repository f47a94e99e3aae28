//! Excising learned rules whose use has decayed.

use crate::activation::bla;
use crate::data::Ms;
use crate::procedural::{Origin, ProceduralMemory};
use crate::symbol::Symbol;

/// Removes learned rules whose base-level activation over their firing
/// times (creation counts as the first) is below `threshold`. Hand-written
/// rules are never removed.
pub fn forget_rules(pm: &mut ProceduralMemory, threshold: f64, decay: f64, now: Ms) -> Vec<Symbol> {
    let doomed: Vec<Symbol> = pm
        .iter()
        .filter(|p| p.origin != Origin::HandWritten)
        .filter(|p| {
            let firings = pm.meta(&p.name).map(|m| m.firings.as_slice()).unwrap_or(&[]);
            bla(firings, now, decay) < threshold
        })
        .map(|p| p.name.clone())
        .collect();
    for name in &doomed {
        pm.remove(name);
    }
    doomed
}

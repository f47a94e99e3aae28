//! Naive join matcher. Positive conditions are joined left to right using the
//! node index where the node position is known; value tests are checked as
//! soon as their operands are bound; negated conditions are checked last.

use crate::data::{ElementId, Value};
use crate::procedural::{Bindings, Condition, Instantiation, Production, Term};
use crate::symbol::Symbol;
use crate::wm::WorkingMemory;

/// Equality used for matching: a node reference and a symbol with the same
/// text are the same atom.
pub fn symbols_equal(a: &Value, b: &Value) -> bool {
    match (a.as_symbol(), b.as_symbol()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

fn unify(term: &Term, actual: &Value, bindings: &mut Bindings, fresh: &mut Vec<Symbol>) -> bool {
    match term {
        Term::Const(c) => symbols_equal(c, actual),
        Term::Var(v) => match bindings.get(v) {
            Some(bound) => symbols_equal(bound, actual),
            None => {
                bindings.insert(v.clone(), actual.clone());
                fresh.push(v.clone());
                true
            }
        },
    }
}

fn resolve<'a>(term: &'a Term, bindings: &'a Bindings) -> Option<&'a Value> {
    match term {
        Term::Const(c) => Some(c),
        Term::Var(v) => bindings.get(v),
    }
}

/// Value tests whose operands are all bound must hold; unbound ones pass for now.
fn tests_hold(cond: &Condition, value: &Value, bindings: &Bindings, require_bound: bool) -> bool {
    cond.tests.iter().all(|t| match resolve(&t.operand, bindings) {
        Some(operand) => t.op.holds(value, operand),
        None => !require_bound,
    })
}

fn candidates(wm: &WorkingMemory, cond: &Condition, bindings: &Bindings) -> Vec<ElementId> {
    match resolve(&cond.node, bindings).and_then(|v| v.as_symbol()) {
        Some(node) => wm.on_node(node),
        None => match &cond.node {
            // a bound non-symbol can never be a node
            Term::Var(v) if bindings.contains_key(v) => Vec::new(),
            Term::Const(_) => Vec::new(),
            _ => wm.elements().map(|e| e.id).collect(),
        },
    }
}

fn element_matches(
    wm: &WorkingMemory,
    id: ElementId,
    cond: &Condition,
    bindings: &mut Bindings,
) -> Option<Vec<Symbol>> {
    let e = wm.get(id)?;
    let mut fresh = Vec::new();
    let ok = unify(&cond.node, &Value::Node(e.triple.node.clone()), bindings, &mut fresh)
        && unify(&cond.edge, &Value::Sym(e.triple.edge.clone()), bindings, &mut fresh)
        && unify(&cond.value, &e.triple.value, bindings, &mut fresh)
        && tests_hold(cond, &e.triple.value, bindings, false);
    if ok {
        Some(fresh)
    } else {
        for v in fresh {
            bindings.remove(&v);
        }
        None
    }
}

/// True when no element matches the negated condition under `bindings`.
pub(crate) fn negation_holds(wm: &WorkingMemory, cond: &Condition, bindings: &Bindings) -> bool {
    let mut local = bindings.clone();
    !candidates(wm, cond, bindings).into_iter().any(|id| {
        match element_matches(wm, id, cond, &mut local) {
            Some(fresh) => {
                let value = &wm.get(id).expect("candidate exists").triple.value;
                let hit = tests_hold(cond, value, &local, true);
                for v in fresh {
                    local.remove(&v);
                }
                hit
            }
            None => false,
        }
    })
}

fn join(
    wm: &WorkingMemory,
    p: &Production,
    positives: &[&Condition],
    idx: usize,
    bindings: &mut Bindings,
    tested: &mut Vec<ElementId>,
    out: &mut Vec<Instantiation>,
) {
    if idx == positives.len() {
        // deferred tests, now that every positive variable is bound
        for (cond, id) in positives.iter().zip(tested.iter()) {
            let value = &wm.get(*id).expect("tested element exists").triple.value;
            if !tests_hold(cond, value, bindings, true) {
                return;
            }
        }
        if p.conditions
            .iter()
            .filter(|c| c.negated)
            .all(|c| negation_holds(wm, c, bindings))
        {
            out.push(Instantiation {
                production: p.name.clone(),
                bindings: bindings.clone(),
                tested: tested.clone(),
            });
        }
        return;
    }
    let cond = positives[idx];
    for id in candidates(wm, cond, bindings) {
        if let Some(fresh) = element_matches(wm, id, cond, bindings) {
            tested.push(id);
            join(wm, p, positives, idx + 1, bindings, tested, out);
            tested.pop();
            for v in fresh {
                bindings.remove(&v);
            }
        }
    }
}

/// Every maximal consistent binding of `p` against `wm`, in element-id order.
pub fn match_production(wm: &WorkingMemory, p: &Production) -> Vec<Instantiation> {
    let positives: Vec<&Condition> = p.conditions.iter().filter(|c| !c.negated).collect();
    let mut out = Vec::new();
    join(wm, p, &positives, 0, &mut Bindings::new(), &mut Vec::new(), &mut out);
    out
}

/// Matches every production accepted by `filter`, in the iteration order given.
pub fn match_productions<'a>(
    wm: &WorkingMemory,
    productions: impl IntoIterator<Item = &'a Production>,
    mut filter: impl FnMut(&Production) -> bool,
) -> Vec<Instantiation> {
    productions
        .into_iter()
        .filter(|p| filter(p))
        .flat_map(|p| match_production(wm, p))
        .collect()
}

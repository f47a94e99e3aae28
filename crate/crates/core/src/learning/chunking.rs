//! Chunking: turning the reasoning done in a substate into a rule that
//! produces the same results directly in the superstate.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::data::{Derivation, ElementId, InstId, Triple, Value};
use crate::procedural::{
    Action, Condition, FiredRecord, Origin, Pattern, PrefKind, Preference, ProceduralMemory,
    Production, Role, Term, TestedElement,
};
use crate::symbol::Symbol;
use crate::wm::ElementClass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChunkRefused {
    #[error("derivation reaches {0}, created inside the substate from module status or perception")]
    Untraceable(Triple),
    #[error("instantiation {0} is not in the substate trace")]
    MissingTrace(InstId),
    #[error("no conditions found for the result")]
    NoConditions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChunkResult {
    Element(Triple),
    Preference(Preference),
}

/// Everything the backtrace needs to know about the substate.
pub struct SubstateTrace<'a> {
    /// Firing records since the substate was created, including
    /// superstate firings.
    pub records: &'a BTreeMap<InstId, FiredRecord>,
    pub productions: &'a ProceduralMemory,
    /// Depth of the substate (the top state is 0).
    pub depth: usize,
    /// First element id created after the substate.
    pub watermark: ElementId,
    pub superstate: Symbol,
    pub buffers: &'a [Symbol],
}

fn is_substate_record<'a>(trace: &SubstateTrace<'a>, id: InstId) -> Option<&'a FiredRecord> {
    trace.records.get(&id).filter(|r| r.level.unwrap_or(0) >= trace.depth)
}

/// Builds a rule whose conditions are the superstate elements the results
/// were derived from and whose actions recreate the results.
///
/// `source` is the instantiation that produced the results.
pub fn chunk_substate(
    results: &[ChunkResult],
    source: InstId,
    trace: &SubstateTrace,
    name: &str,
) -> Result<Production, ChunkRefused> {
    let mut grounds: Vec<Triple> = Vec::new();
    let mut negations: Vec<Condition> = Vec::new();
    let mut seen: BTreeSet<InstId> = BTreeSet::new();
    let mut queue = vec![source];
    while let Some(id) = queue.pop() {
        if !seen.insert(id) {
            continue;
        }
        let record = trace.records.get(&id).ok_or(ChunkRefused::MissingTrace(id))?;
        for te in &record.tested {
            backtrace(te, trace, &mut grounds, &mut queue)?;
        }
        if let Some(p) = trace.productions.get(&record.production) {
            for c in p.conditions.iter().filter(|c| c.negated) {
                negations.push(substitute(c, &record.bindings, id));
            }
        }
    }
    if grounds.is_empty() {
        return Err(ChunkRefused::NoConditions);
    }
    grounds.sort();
    grounds.dedup();

    // identifiers become variables; buffers and everything else stay constant
    let mut ids: BTreeSet<Symbol> = BTreeSet::new();
    for t in &grounds {
        ids.insert(t.node.clone());
        if let Value::Node(n) = &t.value {
            ids.insert(n.clone());
        }
    }
    for b in trace.buffers {
        ids.remove(b);
    }
    let mut vars: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    let mut term = |v: &Value| -> Term {
        match v.as_symbol() {
            Some(s) if ids.contains(s) => {
                let n = vars.len() + 1;
                Term::Var(vars.entry(s.clone()).or_insert_with(|| Symbol::named(&format!("c{n}"))).clone())
            }
            _ => Term::Const(v.clone()),
        }
    };

    let mut conditions: Vec<Condition> = grounds
        .iter()
        .map(|t| Condition::pos(term(&Value::Node(t.node.clone())), Term::Const(Value::Sym(t.edge.clone())), term(&t.value)))
        .collect();
    let nodes: BTreeSet<Symbol> = grounds.iter().map(|t| t.node.clone()).collect();
    for n in negations {
        // only negations about superstate structure carry over
        let on_super = matches!(&n.node, Term::Const(v) if v.as_symbol().is_some_and(|s| nodes.contains(s)));
        if !on_super {
            continue;
        }
        let lift = |t: &Term, term: &mut dyn FnMut(&Value) -> Term| match t {
            Term::Const(v) => term(v),
            var => var.clone(),
        };
        let c = Condition {
            negated: true,
            node: lift(&n.node, &mut term),
            edge: n.edge.clone(),
            value: lift(&n.value, &mut term),
            tests: Vec::new(),
        };
        if !conditions.contains(&c) {
            conditions.push(c);
        }
    }

    let mut actions = Vec::new();
    let mut role = Role::Elaboration;
    for r in results {
        match r {
            ChunkResult::Element(t) => actions.push(Action::Add(Pattern::new(
                term(&Value::Node(t.node.clone())),
                Term::Const(Value::Sym(t.edge.clone())),
                term(&t.value),
            ))),
            ChunkResult::Preference(p) => {
                role = Role::Evaluation;
                actions.push(Action::Prefer {
                    operator: term(&Value::Node(p.operator.clone())),
                    kind: p.kind,
                    other: p.other.as_ref().map(|o| term(&Value::Node(o.clone()))),
                });
            }
        }
    }
    // an action variable must be bound; fall back to the constant otherwise
    let bound: BTreeSet<Symbol> = conditions
        .iter()
        .filter(|c| !c.negated)
        .flat_map(|c| c.terms().filter_map(|t| t.as_var().cloned()).collect::<Vec<_>>())
        .collect();
    let inverse: BTreeMap<Symbol, Symbol> = vars.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
    let ground = |t: Term| match &t {
        Term::Var(v) if !bound.contains(v) => Term::Const(Value::Node(inverse[v].clone())),
        _ => t,
    };
    let actions = actions
        .into_iter()
        .map(|a| match a {
            Action::Add(p) => Action::Add(Pattern::new(ground(p.node), p.edge, ground(p.value))),
            Action::Prefer { operator, kind, other } => {
                Action::Prefer { operator: ground(operator), kind, other: other.map(&ground) }
            }
            other => other,
        })
        .collect();

    let mut p = Production::new(name, role, conditions, actions);
    p.origin = Origin::Chunked;
    Ok(p)
}

fn backtrace(
    te: &TestedElement,
    trace: &SubstateTrace,
    grounds: &mut Vec<Triple>,
    queue: &mut Vec<InstId>,
) -> Result<(), ChunkRefused> {
    let level = te.level.unwrap_or(0);
    let recent = te.id >= trace.watermark;
    let source = match &te.derivation {
        Some(Derivation::Instantiation(i)) => Some(*i),
        Some(Derivation::Retrieval { request, .. }) => *request,
        None => None,
    };
    if level < trace.depth {
        if recent && matches!(te.class, ElementClass::Status | ElementClass::Percept) {
            return Err(ChunkRefused::Untraceable(te.triple.clone()));
        }
        // earlier results of this substate are explained, not tested
        match source.filter(|i| recent && is_substate_record(trace, *i).is_some()) {
            Some(i) => queue.push(i),
            None => grounds.push(te.triple.clone()),
        }
        return Ok(());
    }
    match te.class {
        ElementClass::Status | ElementClass::Percept => Err(ChunkRefused::Untraceable(te.triple.clone())),
        ElementClass::Architecture => {
            if te.triple.edge.as_str() == "item" {
                if let Some(op) = te.triple.value.as_symbol() {
                    grounds.push(Triple::new(trace.superstate.clone(), Symbol::named("operator"), Value::Node(op.clone())));
                }
            }
            Ok(())
        }
        _ => match source {
            Some(i) => {
                queue.push(i);
                Ok(())
            }
            None => Err(ChunkRefused::Untraceable(te.triple.clone())),
        },
    }
}

/// Applies bindings to a negated condition, keeping unbound variables
/// local to this instantiation.
fn substitute(c: &Condition, bindings: &crate::procedural::Bindings, inst: InstId) -> Condition {
    let sub = |t: &Term| match t {
        Term::Var(v) => match bindings.get(v) {
            Some(val) => Term::Const(val.clone()),
            None => Term::Var(Symbol::named(&format!("n{}-{}", inst.0, v))),
        },
        c => c.clone(),
    };
    Condition { negated: true, node: sub(&c.node), edge: sub(&c.edge), value: sub(&c.value), tests: Vec::new() }
}

/// Does this preference concern an operator proposed for a shallower state?
pub fn preference_is_result(p: &Preference, shallower_candidates: &BTreeSet<Symbol>) -> bool {
    shallower_candidates.contains(&p.operator)
        && p.other.as_ref().is_none_or(|o| shallower_candidates.contains(o))
        && p.kind != PrefKind::Acceptable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedural::{ElaborationState, TestedElement};
    use crate::wm::{Mode, Provenance, WorkingMemory};

    fn s(x: &str) -> Symbol {
        Symbol::named(x)
    }

    fn te(id: u64, t: Triple, class: ElementClass, derivation: Option<Derivation>, level: usize) -> TestedElement {
        TestedElement { id: ElementId(id), triple: t, class, derivation, copy_of: None, level: Some(level) }
    }

    fn record(id: u64, prod: &str, tested: Vec<TestedElement>, created: Vec<Triple>, level: usize) -> FiredRecord {
        FiredRecord {
            id: InstId(id),
            production: s(prod),
            role: Role::Elaboration,
            bindings: Default::default(),
            tested,
            created,
            removed: vec![],
            preferences: vec![],
            commands: vec![],
            fired_at: 0,
            level: Some(level),
        }
    }

    fn num(n: f64) -> Value {
        Value::Num(n)
    }

    /// The substate adds a and b into a local sum, then copies it up.
    #[test]
    fn two_step_derivation() {
        let a = Triple::of("s1", "a", num(2.0));
        let b = Triple::of("s1", "b", num(2.0));
        let sup = Triple::of("S1", "superstate", Value::node("s1"));
        let local = Triple::of("S1", "sum", num(4.0));
        let result = Triple::of("s1", "answer", num(4.0));
        let mut records = BTreeMap::new();
        records.insert(
            InstId(1),
            record(
                1,
                "add",
                vec![
                    te(10, sup.clone(), ElementClass::Architecture, None, 1),
                    te(1, a.clone(), ElementClass::Architecture, None, 0),
                    te(2, b.clone(), ElementClass::Architecture, None, 0),
                ],
                vec![local.clone()],
                1,
            ),
        );
        records.insert(
            InstId(2),
            record(
                2,
                "report",
                vec![
                    te(10, sup, ElementClass::Architecture, None, 1),
                    te(12, local, ElementClass::Rule, Some(Derivation::Instantiation(InstId(1))), 1),
                ],
                vec![result.clone()],
                1,
            ),
        );
        let pm = ProceduralMemory::new();
        let trace = SubstateTrace {
            records: &records,
            productions: &pm,
            depth: 1,
            watermark: ElementId(10),
            superstate: s("s1"),
            buffers: &[],
        };
        let p = chunk_substate(&[ChunkResult::Element(result.clone())], InstId(2), &trace, "chunk-1").unwrap();
        assert_eq!(p.conditions.len(), 2);
        assert_eq!(p.actions.len(), 1);
        assert_eq!(p.role, Role::Elaboration);

        // firing the chunk on the superstate alone gives the result
        let mut wm = WorkingMemory::new(Mode::Soar, vec![], s("s1"), 0);
        wm.add(a, Provenance::Architecture, 0).unwrap();
        wm.add(b, Provenance::Architecture, 0).unwrap();
        let mut pm = ProceduralMemory::new();
        pm.add(p, 0.0, 0);
        let mut st = ElaborationState::new();
        let mut next = 1;
        st.run(&mut wm, &pm, &mut next, 0, 100).unwrap();
        assert!(wm.contains(&result));
        assert!(wm.states().len() == 1);
    }

    #[test]
    fn identity_transport() {
        let a = Triple::of("s1", "color", Value::sym("red"));
        let mut records = BTreeMap::new();
        records.insert(InstId(1), record(1, "copy", vec![te(1, a.clone(), ElementClass::Architecture, None, 0)], vec![], 1));
        let pm = ProceduralMemory::new();
        let trace = SubstateTrace {
            records: &records,
            productions: &pm,
            depth: 1,
            watermark: ElementId(5),
            superstate: s("s1"),
            buffers: &[],
        };
        let result = Triple::of("s1", "seen", Value::sym("red"));
        let p = chunk_substate(&[ChunkResult::Element(result)], InstId(1), &trace, "chunk-1").unwrap();
        assert_eq!(p.conditions.len(), 1);
        assert_eq!(p.actions.len(), 1);
    }

    #[test]
    fn local_status_refuses() {
        let st = Triple::of("retrieval", "status", Value::sym("success"));
        let mut records = BTreeMap::new();
        records.insert(InstId(1), record(1, "r", vec![te(20, st, ElementClass::Status, None, 0)], vec![], 1));
        let pm = ProceduralMemory::new();
        let trace = SubstateTrace {
            records: &records,
            productions: &pm,
            depth: 1,
            watermark: ElementId(10),
            superstate: s("s1"),
            buffers: &[s("retrieval")],
        };
        let err = chunk_substate(&[ChunkResult::Element(Triple::of("s1", "x", num(1.0)))], InstId(1), &trace, "c");
        assert!(matches!(err, Err(ChunkRefused::Untraceable(_))));
    }
}

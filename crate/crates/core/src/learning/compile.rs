//! Production compilation: composing two rules that fired on consecutive
//! cycles into one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::data::{Derivation, Triple, Value};
use crate::procedural::{
    bind_pattern, Action, Bindings, CommandAction, CommandArgs, Condition, CueItem, FiredRecord,
    Origin, Pattern, Production, Role, Term, ValueTest,
};
use crate::symbol::Symbol;
use crate::wm::ElementClass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotCompilable {
    #[error("rule {0} interacts with the environment")]
    Environmental(Symbol),
    #[error("retrieval requested by the first rule is not tested by the second")]
    UntestedRetrieval,
    #[error("both rules command buffer {0}")]
    SameBuffer(Symbol),
    #[error("first rule's changes interact with a negated condition of the second")]
    NegationInteraction,
    #[error("a value test cannot be carried over")]
    LostTest,
    #[error("instantiation does not belong to its production")]
    Mismatch,
}

const RETRIEVALS: [&str; 3] = ["retrieve", "retrieve-blend", "retrieve-name"];

/// Maps values to variables: one variable per distinct value, so variables
/// of the two rules that were bound to the same value become one.
struct Generalizer {
    vars: BTreeMap<Value, Symbol>,
    kept: BTreeSet<Value>,
}

fn key(v: &Value) -> Value {
    match v {
        Value::Node(s) => Value::Sym(s.clone()),
        other => other.clone(),
    }
}

impl Generalizer {
    fn term(&mut self, t: &Term, b: &Bindings, tag: &str) -> Term {
        match t {
            Term::Const(c) => Term::Const(c.clone()),
            Term::Var(v) => match b.get(v) {
                Some(val) if self.kept.contains(&key(val)) => {
                    let n = self.vars.len() + 1;
                    let name = self.vars.entry(key(val)).or_insert_with(|| Symbol::named(&format!("v{n}")));
                    Term::Var(name.clone())
                }
                Some(val) => Term::Const(val.clone()),
                // only negated conditions have unbound variables
                None => Term::Var(Symbol::named(&format!("{tag}-{v}"))),
            },
        }
    }

    fn condition(&mut self, c: &Condition, b: &Bindings, tag: &str) -> Condition {
        Condition {
            negated: c.negated,
            node: self.term(&c.node, b, tag),
            edge: self.term(&c.edge, b, tag),
            value: self.term(&c.value, b, tag),
            tests: c
                .tests
                .iter()
                .map(|t| ValueTest { op: t.op, operand: self.term(&t.operand, b, tag) })
                .collect(),
        }
    }

    fn pattern(&mut self, p: &Pattern, b: &Bindings, tag: &str) -> Pattern {
        Pattern { node: self.term(&p.node, b, tag), edge: self.term(&p.edge, b, tag), value: self.term(&p.value, b, tag) }
    }

    fn action(&mut self, a: &Action, b: &Bindings, tag: &str) -> Action {
        match a {
            Action::Add(p) => Action::Add(self.pattern(p, b, tag)),
            Action::Remove(p) => Action::Remove(self.pattern(p, b, tag)),
            Action::Clear(s) => Action::Clear(s.clone()),
            Action::Command(c) => Action::Command(CommandAction {
                name: c.name.clone(),
                buffer: c.buffer.clone(),
                args: match &c.args {
                    CommandArgs::Cue(items) => CommandArgs::Cue(
                        items
                            .iter()
                            .map(|i| CueItem { edge: i.edge.clone(), test: i.test.map(|t| self.term(t, b, tag)) })
                            .collect(),
                    ),
                    CommandArgs::Name { name, depth } => {
                        CommandArgs::Name { name: self.term(name, b, tag), depth: *depth }
                    }
                    CommandArgs::Episode(ps) => {
                        CommandArgs::Episode(ps.iter().map(|p| self.pattern(p, b, tag)).collect())
                    }
                    CommandArgs::Terms(ts) => CommandArgs::Terms(ts.iter().map(|t| self.term(t, b, tag)).collect()),
                    other => other.clone(),
                },
            }),
            Action::Propose { state, operator, attrs } => Action::Propose {
                state: self.term(state, b, tag),
                operator: operator.clone(),
                attrs: attrs.iter().map(|(e, t)| (e.clone(), self.term(t, b, tag))).collect(),
            },
            Action::Prefer { operator, kind, other } => Action::Prefer {
                operator: self.term(operator, b, tag),
                kind: *kind,
                other: other.as_ref().map(|o| self.term(o, b, tag)),
            },
        }
    }
}

/// Does `cond`, with `b` substituted and unbound variables as wildcards,
/// match `t`?
fn could_match(cond: &Condition, b: &Bindings, t: &Triple) -> bool {
    let hit = |term: &Term, actual: &Value| match term {
        Term::Const(c) => crate::procedural::symbols_equal(c, actual),
        Term::Var(v) => b.get(v).map(|x| crate::procedural::symbols_equal(x, actual)).unwrap_or(true),
    };
    hit(&cond.node, &Value::Sym(t.node.clone())) && hit(&cond.edge, &Value::Sym(t.edge.clone())) && hit(&cond.value, &t.value)
}

fn positives(p: &Production) -> Vec<&Condition> {
    p.conditions.iter().filter(|c| !c.negated).collect()
}

/// Composes the instantiation `r1` of `p1` with the instantiation `r2` of
/// `p2` that fired right after it.
///
/// Conditions of `p2` satisfied by what `p1` created, by the retrieval `p1`
/// requested, or by the status of a buffer `p1` commanded are dropped; the
/// values they bound are baked in as constants unless a kept condition
/// binds them too. Creations of `p1` that `p2` tested and removed are
/// dropped along with the removal, and so is the retrieval request. Variables bound to equal values in the two
/// rules become one variable.
pub fn compile_pair(
    p1: &Production,
    r1: &FiredRecord,
    p2: &Production,
    r2: &FiredRecord,
    name: &str,
    init_utility: f64,
) -> Result<Production, NotCompilable> {
    let pos1 = positives(p1);
    let pos2 = positives(p2);
    if pos1.len() != r1.tested.len() || pos2.len() != r2.tested.len() {
        return Err(NotCompilable::Mismatch);
    }
    for (p, r) in [(p1, r1), (p2, r2)] {
        if r.commands.iter().any(|c| matches!(c.name.as_str(), "motor" | "halt")) {
            return Err(NotCompilable::Environmental(p.name.clone()));
        }
    }

    let baked: BTreeSet<Symbol> = r1
        .commands
        .iter()
        .filter(|c| RETRIEVALS.contains(&c.name.as_str()))
        .filter_map(|c| c.buffer.clone())
        .collect();
    let kept_cmd_buffers: BTreeSet<Symbol> = r1
        .commands
        .iter()
        .filter(|c| !RETRIEVALS.contains(&c.name.as_str()))
        .filter_map(|c| c.buffer.clone())
        .collect();
    for c in &r2.commands {
        if let Some(b) = &c.buffer {
            if kept_cmd_buffers.contains(b) {
                return Err(NotCompilable::SameBuffer(b.clone()));
            }
        }
    }

    let created1: BTreeSet<&Triple> = r1.created.iter().collect();
    let mut elided = vec![false; pos2.len()];
    let mut retrieval_tested = false;
    for (i, te) in r2.tested.iter().enumerate() {
        elided[i] = match (&te.class, &te.derivation) {
            (_, Some(Derivation::Instantiation(id))) if *id == r1.id && created1.contains(&te.triple) => true,
            (_, Some(Derivation::Retrieval { request: Some(id), .. })) if *id == r1.id => {
                retrieval_tested = true;
                true
            }
            (ElementClass::Status, _) => baked.contains(&te.triple.node),
            _ => false,
        };
    }
    if !baked.is_empty() && !retrieval_tested {
        return Err(NotCompilable::UntestedRetrieval);
    }

    let mut effects1: Vec<&Triple> = r1.created.iter().collect();
    effects1.extend(r1.removed.iter());
    for neg in p2.conditions.iter().filter(|c| c.negated) {
        if effects1.iter().any(|t| could_match(neg, &r2.bindings, t)) {
            return Err(NotCompilable::NegationInteraction);
        }
    }

    // values that stay variables: those bound by a kept positive condition
    let mut kept = BTreeSet::new();
    let mut note = |c: &Condition, b: &Bindings| {
        for t in [&c.node, &c.edge, &c.value] {
            if let Some(v) = t.as_var().and_then(|v| b.get(v)) {
                kept.insert(key(v));
            }
        }
    };
    for c in &pos1 {
        note(c, &r1.bindings);
    }
    for (i, c) in pos2.iter().enumerate() {
        if !elided[i] {
            note(c, &r2.bindings);
        }
    }
    let mut g = Generalizer { vars: BTreeMap::new(), kept };

    let mut conditions: Vec<Condition> = Vec::new();
    let push = |conds: &mut Vec<Condition>, c: Condition| {
        if !conds.contains(&c) {
            conds.push(c);
        }
    };
    for c in &p1.conditions {
        let c = g.condition(c, &r1.bindings, "a");
        push(&mut conditions, c);
    }
    let mut orphan_tests = Vec::new();
    for (i, c) in pos2.iter().enumerate() {
        if elided[i] {
            if !c.tests.is_empty() {
                if let Term::Var(_) = g.term(&c.value, &r2.bindings, "b") {
                    orphan_tests.push(g.condition(c, &r2.bindings, "b"));
                }
            }
            continue;
        }
        let c = g.condition(c, &r2.bindings, "b");
        push(&mut conditions, c);
    }
    for c in p2.conditions.iter().filter(|c| c.negated) {
        let c = g.condition(c, &r2.bindings, "b");
        push(&mut conditions, c);
    }
    // tests from dropped conditions move to a kept condition on the same value
    for o in orphan_tests {
        let host = conditions.iter_mut().find(|c| !c.negated && c.value == o.value);
        match host {
            Some(h) => {
                for t in o.tests {
                    if !h.tests.contains(&t) {
                        h.tests.push(t);
                    }
                }
            }
            None => return Err(NotCompilable::LostTest),
        }
    }

    // a creation of p1 that p2 tests and then removes cancels out
    let removed2: BTreeSet<&Triple> = r2.removed.iter().collect();
    let tested2: BTreeSet<&Triple> = r2
        .tested
        .iter()
        .zip(&elided)
        .filter(|(t, e)| **e && removed2.contains(&t.triple))
        .map(|(t, _)| &t.triple)
        .collect();
    let mut actions = Vec::new();
    for a in &p1.actions {
        match a {
            Action::Add(p) if bind_pattern(p, &r1.bindings).is_some_and(|t| tested2.contains(&t)) => continue,
            Action::Command(c) if RETRIEVALS.contains(&c.name.as_str()) => continue,
            _ => actions.push(g.action(a, &r1.bindings, "a")),
        }
    }
    for a in &p2.actions {
        match a {
            Action::Remove(p) if bind_pattern(p, &r2.bindings).is_some_and(|t| tested2.contains(&t)) => continue,
            _ => actions.push(g.action(a, &r2.bindings, "b")),
        }
    }

    let mut p = Production::new(name, Role::Plain, conditions, actions);
    p.origin = Origin::Compiled;
    p.utility = Some(init_utility);
    Ok(p)
}

/// A text form of a rule that is equal for rules differing only in
/// variable names, condition order, name, utility and origin.
pub fn canonical(p: &Production) -> String {
    let shape = |t: &Term| match t {
        Term::Var(_) => "?".to_string(),
        Term::Const(c) => c.to_string(),
    };
    let cond_shape = |c: &Condition| {
        let mut s = format!("{}{} {} {}", if c.negated { "-" } else { "" }, shape(&c.node), shape(&c.edge), shape(&c.value));
        for t in &c.tests {
            let _ = write!(s, " {} {}", t.op.text(), shape(&t.operand));
        }
        s
    };
    let mut conds: Vec<&Condition> = p.conditions.iter().collect();
    conds.sort_by_key(|c| (c.negated, cond_shape(c)));

    let mut names: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut rename = |t: &Term| match t {
        Term::Var(v) => {
            let n = names.len();
            format!("?{}", names.entry(v.clone()).or_insert(n))
        }
        Term::Const(c) => c.to_string(),
    };
    let mut out = format!("{}|{}|", p.role.keyword(), p.operator.as_ref().map(|o| o.as_str()).unwrap_or(""));
    for c in conds {
        let _ = write!(out, "{}({} {} {}", if c.negated { "-" } else { "" }, rename(&c.node), rename(&c.edge), rename(&c.value));
        for t in &c.tests {
            let _ = write!(out, " {} {}", t.op.text(), rename(&t.operand));
        }
        out.push(')');
    }
    out.push_str("-->");
    for a in &p.actions {
        let terms: Vec<String> = a.terms().into_iter().map(&mut rename).collect();
        let _ = write!(out, "{}[{}]", action_tag(a), terms.join(" "));
    }
    out
}

fn action_tag(a: &Action) -> String {
    match a {
        Action::Add(_) => "+".into(),
        Action::Remove(_) => "-".into(),
        Action::Clear(b) => format!("clear {b}"),
        Action::Command(c) => format!(
            "!{} {}{}",
            c.name,
            c.buffer.as_ref().map(|b| b.as_str()).unwrap_or(""),
            match &c.args {
                CommandArgs::Cue(items) => items
                    .iter()
                    .map(|i| format!(" {}{}", i.edge, i.test.prefix()))
                    .collect::<String>(),
                CommandArgs::Name { depth, .. } => format!(" depth {depth:?}"),
                _ => String::new(),
            }
        ),
        Action::Propose { operator, attrs, .. } => {
            format!("op {operator} {}", attrs.iter().map(|(e, _)| e.as_str()).collect::<Vec<_>>().join(","))
        }
        Action::Prefer { kind, .. } => format!("pref {}", kind.word()),
    }
}

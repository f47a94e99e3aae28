//! Procedural memory: productions, matching against working memory, and the
//! per-cycle retrieval of what to do next.

mod decide;
mod engine;
mod matcher;
mod select;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{ElementId, Ms, Triple, Value};
use crate::symbol::Symbol;

pub use decide::{decide, Decision, ImpasseKind, Preference};
pub use engine::{
    apply_operator, fire, instantiate_actions, negatives_hold, ApplyOutcome, BoundArgs,
    BoundCommand, Effect, ElaborationState, FireOutcome, FiredRecord, TestedElement, WaveReport,
};
pub use matcher::{match_production, match_productions, symbols_equal};
pub use select::{logistic_noise, select_actr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// ACT-R single-rule production.
    Plain,
    Elaboration,
    Proposal,
    Evaluation,
    Application,
}

impl Role {
    pub fn keyword(self) -> &'static str {
        match self {
            Role::Plain => "rule",
            Role::Elaboration => "elaboration",
            Role::Proposal => "propose",
            Role::Evaluation => "evaluate",
            Role::Application => "apply",
        }
    }

    /// Roles whose products are justification-supported.
    pub fn is_elaboration_phase(self) -> bool {
        matches!(self, Role::Elaboration | Role::Proposal | Role::Evaluation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    HandWritten,
    Compiled,
    Chunked,
}

impl Origin {
    pub fn word(self) -> &'static str {
        match self {
            Origin::HandWritten => "hand-written",
            Origin::Compiled => "compiled",
            Origin::Chunked => "chunked",
        }
    }
}

/// A pattern position: a variable (stored without the leading `?`) or a constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Symbol),
    Const(Value),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::named(name))
    }

    pub fn sym(text: &str) -> Term {
        Term::Const(Value::sym(text))
    }

    pub fn node(text: &str) -> Term {
        Term::Const(Value::node(text))
    }

    pub fn num(n: f64) -> Term {
        Term::Const(Value::Num(n))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestOp {
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl TestOp {
    pub fn text(self) -> &'static str {
        match self {
            TestOp::Ne => "!=",
            TestOp::Lt => "<",
            TestOp::Gt => ">",
            TestOp::Le => "<=",
            TestOp::Ge => ">=",
        }
    }

    /// Applies the test to a candidate value against an operand.
    pub fn holds(self, candidate: &Value, operand: &Value) -> bool {
        match self {
            TestOp::Ne => !symbols_equal(candidate, operand),
            _ => match (candidate.as_num(), operand.as_num()) {
                (Some(a), Some(b)) => match self {
                    TestOp::Lt => a < b,
                    TestOp::Gt => a > b,
                    TestOp::Le => a <= b,
                    TestOp::Ge => a >= b,
                    TestOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueTest {
    pub op: TestOp,
    pub operand: Term,
}

/// `(node ^edge value tests*)`, optionally negated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition {
    pub negated: bool,
    pub node: Term,
    pub edge: Term,
    pub value: Term,
    pub tests: Vec<ValueTest>,
}

impl Condition {
    pub fn pos(node: Term, edge: Term, value: Term) -> Condition {
        Condition { negated: false, node, edge, value, tests: Vec::new() }
    }

    pub fn neg(node: Term, edge: Term, value: Term) -> Condition {
        Condition { negated: true, node, edge, value, tests: Vec::new() }
    }

    pub fn with_test(mut self, op: TestOp, operand: Term) -> Condition {
        self.tests.push(ValueTest { op, operand });
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        [&self.node, &self.edge, &self.value]
            .into_iter()
            .chain(self.tests.iter().map(|t| &t.operand))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub node: Term,
    pub edge: Term,
    pub value: Term,
}

impl Pattern {
    pub fn new(node: Term, edge: Term, value: Term) -> Pattern {
        Pattern { node, edge, value }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        [&self.node, &self.edge, &self.value].into_iter()
    }
}

/// One constraint of a declarative retrieval cue.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CueTest<T> {
    Eq(T),
    Ne(T),
    Lt(T),
    Gt(T),
    Le(T),
    Ge(T),
    Present,
}

impl<T> CueTest<T> {
    pub fn operand(&self) -> Option<&T> {
        match self {
            CueTest::Eq(t) | CueTest::Ne(t) | CueTest::Lt(t) | CueTest::Gt(t) | CueTest::Le(t) | CueTest::Ge(t) => Some(t),
            CueTest::Present => None,
        }
    }

    pub fn map<U>(&self, f: impl FnOnce(&T) -> U) -> CueTest<U> {
        match self {
            CueTest::Eq(t) => CueTest::Eq(f(t)),
            CueTest::Ne(t) => CueTest::Ne(f(t)),
            CueTest::Lt(t) => CueTest::Lt(f(t)),
            CueTest::Gt(t) => CueTest::Gt(f(t)),
            CueTest::Le(t) => CueTest::Le(f(t)),
            CueTest::Ge(t) => CueTest::Ge(f(t)),
            CueTest::Present => CueTest::Present,
        }
    }

    pub fn prefix(&self) -> &'static str {
        match self {
            CueTest::Eq(_) => "",
            CueTest::Ne(_) => "!= ",
            CueTest::Lt(_) => "< ",
            CueTest::Gt(_) => "> ",
            CueTest::Le(_) => "<= ",
            CueTest::Ge(_) => ">= ",
            CueTest::Present => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CueItem {
    pub edge: Symbol,
    pub test: CueTest<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommandArgs {
    None,
    Cue(Vec<CueItem>),
    Name { name: Term, depth: Option<u32> },
    Episode(Vec<Pattern>),
    Terms(Vec<Term>),
    /// Arguments of a command outside the vocabulary, kept as source tokens.
    Raw(Vec<String>),
}

/// `!name [buffer] args`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommandAction {
    pub name: Symbol,
    pub buffer: Option<Symbol>,
    pub args: CommandArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefKind {
    Acceptable,
    Reject,
    Better,
    Worse,
    Best,
    Worst,
    Indifferent,
}

impl PrefKind {
    pub const ALL: [PrefKind; 7] = [
        PrefKind::Acceptable,
        PrefKind::Reject,
        PrefKind::Better,
        PrefKind::Worse,
        PrefKind::Best,
        PrefKind::Worst,
        PrefKind::Indifferent,
    ];

    pub fn word(self) -> &'static str {
        match self {
            PrefKind::Acceptable => "acceptable",
            PrefKind::Reject => "reject",
            PrefKind::Better => "better",
            PrefKind::Worse => "worse",
            PrefKind::Best => "best",
            PrefKind::Worst => "worst",
            PrefKind::Indifferent => "indifferent",
        }
    }

    pub fn from_word(w: &str) -> Option<PrefKind> {
        PrefKind::ALL.into_iter().find(|k| k.word() == w)
    }

    pub fn is_binary(self) -> bool {
        matches!(self, PrefKind::Better | PrefKind::Worse)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Add(Pattern),
    Remove(Pattern),
    Clear(Symbol),
    Command(CommandAction),
    /// Creates an operator candidate for a state.
    Propose { state: Term, operator: Symbol, attrs: Vec<(Symbol, Term)> },
    Prefer { operator: Term, kind: PrefKind, other: Option<Term> },
}

impl Action {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Action::Add(p) | Action::Remove(p) => p.terms().collect(),
            Action::Clear(_) => Vec::new(),
            Action::Command(c) => match &c.args {
                CommandArgs::Cue(items) => items.iter().filter_map(|i| i.test.operand()).collect(),
                CommandArgs::Name { name, .. } => vec![name],
                CommandArgs::Episode(ps) => ps.iter().flat_map(|p| p.terms()).collect(),
                CommandArgs::Terms(ts) => ts.iter().collect(),
                CommandArgs::None | CommandArgs::Raw(_) => Vec::new(),
            },
            Action::Propose { state, attrs, .. } => {
                std::iter::once(state).chain(attrs.iter().map(|(_, t)| t)).collect()
            }
            Action::Prefer { operator, other, .. } => std::iter::once(operator).chain(other.iter()).collect(),
        }
    }
}

/// A condition-action rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub name: Symbol,
    pub role: Role,
    /// The operator an application rule applies.
    pub operator: Option<Symbol>,
    pub conditions: Vec<Condition>,
    pub actions: Vec<Action>,
    /// Initial utility; `None` means the configured default.
    pub utility: Option<f64>,
    pub rl: bool,
    pub origin: Origin,
}

impl Production {
    pub fn new(name: &str, role: Role, conditions: Vec<Condition>, actions: Vec<Action>) -> Production {
        Production {
            name: Symbol::named(name),
            role,
            operator: None,
            conditions,
            actions,
            utility: None,
            rl: false,
            origin: Origin::HandWritten,
        }
    }

    /// Variables bound by positive conditions.
    pub fn bound_vars(&self) -> std::collections::BTreeSet<Symbol> {
        self.conditions
            .iter()
            .filter(|c| !c.negated)
            .flat_map(|c| [&c.node, &c.edge, &c.value])
            .filter_map(|t| t.as_var().cloned())
            .collect()
    }
}

pub type Bindings = BTreeMap<Symbol, Value>;

/// A consistent match of a production against working memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub production: Symbol,
    pub bindings: Bindings,
    /// Elements matched by the positive conditions, in condition order.
    pub tested: Vec<ElementId>,
}

impl Instantiation {
    /// Identity used for refraction and for elaboration bookkeeping.
    pub fn key(&self) -> (Symbol, Vec<ElementId>) {
        (self.production.clone(), self.tested.clone())
    }
}

/// Architecture-side bookkeeping for one production; this is metadata and
/// never visible to rule conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleMeta {
    pub utility: f64,
    pub created_at: Ms,
    pub firings: Vec<Ms>,
    /// For compiled rules: the pair that produced it.
    pub parents: Option<(Symbol, Symbol)>,
    /// How many times this rule has been (re)learned.
    pub learned: u32,
}

/// The production store plus its metadata.
#[derive(Debug, Clone, Default)]
pub struct ProceduralMemory {
    rules: BTreeMap<Symbol, Production>,
    meta: BTreeMap<Symbol, RuleMeta>,
}

impl ProceduralMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: Production, default_utility: f64, now: Ms) {
        let utility = p.utility.unwrap_or(default_utility);
        self.meta.insert(
            p.name.clone(),
            RuleMeta { utility, created_at: now, firings: vec![now], parents: None, learned: 1 },
        );
        self.rules.insert(p.name.clone(), p);
    }

    pub fn remove(&mut self, name: &Symbol) -> Option<Production> {
        self.meta.remove(name);
        self.rules.remove(name)
    }

    pub fn get(&self, name: &Symbol) -> Option<&Production> {
        self.rules.get(name)
    }

    pub fn contains(&self, name: &Symbol) -> bool {
        self.rules.contains_key(name)
    }

    /// Productions in name order.
    pub fn iter(&self) -> impl Iterator<Item = &Production> {
        self.rules.values()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn meta(&self, name: &Symbol) -> Option<&RuleMeta> {
        self.meta.get(name)
    }

    pub(crate) fn meta_mut(&mut self, name: &Symbol) -> Option<&mut RuleMeta> {
        self.meta.get_mut(name)
    }

    pub fn utility(&self, name: &Symbol) -> f64 {
        self.meta.get(name).map(|m| m.utility).unwrap_or(0.0)
    }

    pub(crate) fn set_utility(&mut self, name: &Symbol, u: f64) {
        if let Some(m) = self.meta.get_mut(name) {
            m.utility = u;
        }
    }

    pub(crate) fn record_firing(&mut self, name: &Symbol, now: Ms) {
        if let Some(m) = self.meta.get_mut(name) {
            m.firings.push(now);
        }
    }

    /// Snapshot of the rules, name order.
    pub fn productions(&self) -> Vec<Production> {
        self.rules.values().cloned().collect()
    }
}

/// Substitutes bindings into a term.
pub fn bind(term: &Term, bindings: &Bindings) -> Option<Value> {
    match term {
        Term::Const(v) => Some(v.clone()),
        Term::Var(v) => bindings.get(v).cloned(),
    }
}

/// Substitutes bindings into a pattern, producing a triple.
pub fn bind_pattern(p: &Pattern, bindings: &Bindings) -> Option<Triple> {
    let node = bind(&p.node, bindings)?.as_symbol()?.clone();
    let edge = bind(&p.edge, bindings)?.as_symbol()?.clone();
    let value = bind(&p.value, bindings)?;
    Some(Triple { node, edge, value })
}

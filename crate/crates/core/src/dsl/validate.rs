//! Static checks that turn a parsed tree into a runnable model.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::RunConfig;
use crate::data::Value;
use crate::dsl::ast::{ChunkDecl, ModelAst};
use crate::dsl::diag::{has_errors, Diagnostic};
use crate::dsl::lexer::Span;
use crate::dsl::suggest;
use crate::procedural::{Action, CommandArgs, Production, Role, Term};
use crate::symbol::{is_innate, Symbol, COMMAND_WORDS};
use crate::wm::Mode;

/// Edge names that would denote architecture metadata. Metadata is never
/// agent data, so no model may mention these.
pub const METADATA_EDGES: [&str; 10] = [
    "activation",
    "base-level",
    "utility",
    "copy-of",
    "derivation",
    "substate-level",
    "created-at",
    "accesses",
    "association",
    "justification",
];

/// Edges only the architecture writes.
pub const ARCHITECTURE_EDGES: [&str; 10] = [
    "status", "retrieved", "percept", "cue", "command", "operator", "selected", "superstate", "impasse", "item",
];

const SOAR_ONLY_COMMANDS: [&str; 4] = ["retrieve-name", "em-query", "em-next", "em-prev"];
const ACTR_ONLY_COMMANDS: [&str; 1] = ["retrieve-blend"];

pub fn default_buffers(mode: Mode) -> Vec<Symbol> {
    let names: &[&str] = match mode {
        Mode::Actr => &["goal", "imaginal", "retrieval", "blend", "percept", "motor", "reward"],
        Mode::Soar => &["retrieval", "episodic", "percept", "motor", "reward"],
    };
    names.iter().map(|n| Symbol::named(n)).collect()
}

/// A model that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub mode: Mode,
    pub config: RunConfig,
    pub buffers: Vec<Symbol>,
    pub wm: Vec<ChunkDecl>,
    pub dm: Vec<ChunkDecl>,
    pub env: Option<String>,
    pub productions: Vec<Production>,
}

struct Checker<'a> {
    ast: &'a ModelAst,
    buffers: BTreeSet<Symbol>,
    diags: Vec<Diagnostic>,
}

fn edge_word(t: &Term) -> Option<&str> {
    match t {
        Term::Const(v) => v.as_symbol().map(Symbol::as_str),
        Term::Var(_) => None,
    }
}

impl Checker<'_> {
    fn err(&mut self, span: Span, m: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, m));
    }

    fn warn(&mut self, span: Span, m: impl Into<String>) {
        self.diags.push(Diagnostic::warning(span, m));
    }

    fn user_name(&mut self, span: Span, what: &str, s: &Symbol) {
        if is_innate(s.as_str()) {
            self.err(span, format!("{what} `{s}` collides with the innate vocabulary"));
        }
    }

    fn metadata_edge(&mut self, span: Span, edge: &str) {
        if METADATA_EDGES.contains(&edge) {
            self.err(span, format!("`^{edge}` names architecture metadata, which is not agent data"));
        }
    }

    fn chunks(&mut self, chunks: &[ChunkDecl], block: &str) {
        for c in chunks {
            self.user_name(c.span, "chunk name", &c.node);
            for (e, _) in &c.slots {
                self.metadata_edge(c.span, e.as_str());
                if e.as_str() == "status" {
                    self.err(c.span, format!("`{block}` may not set module status"));
                }
            }
        }
    }

    fn initial_wm(&mut self) {
        let mode = self.ast.mode;
        let wm = &self.ast.wm;
        let buffers = self.buffers.clone();
        let mut targets: BTreeMap<&Symbol, BTreeSet<&Symbol>> = BTreeMap::new();
        for c in wm {
            for (_, v) in &c.slots {
                if let Value::Node(n) = v {
                    targets.entry(&c.node).or_default().insert(n);
                }
            }
        }
        let declared: BTreeSet<&Symbol> = wm.iter().map(|c| &c.node).collect();
        match mode {
            Mode::Actr => {
                let mut reachable: BTreeSet<&Symbol> = buffers.iter().collect();
                for b in &buffers {
                    reachable.extend(targets.get(b).into_iter().flatten());
                }
                for c in wm {
                    if !reachable.contains(&c.node) {
                        let m = format!("chunk `{}` is outside every buffer; point a buffer at it or move it to `dm`", c.node);
                        self.err(c.span, m);
                    }
                }
            }
            Mode::Soar => {
                let (config, _) = RunConfig::from_params(mode, &self.ast.params);
                let top = config.top_state;
                let mut reachable: BTreeSet<&Symbol> = BTreeSet::from([&top]);
                reachable.extend(buffers.iter());
                let mut stack = vec![&top];
                while let Some(n) = stack.pop() {
                    for t in targets.get(n).into_iter().flatten() {
                        if reachable.insert(t) {
                            stack.push(t);
                        }
                    }
                }
                for c in wm {
                    if !reachable.contains(&c.node) {
                        let m = format!("chunk `{}` is not linked to the top state `{top}`", c.node);
                        self.err(c.span, m);
                    }
                    for (_, v) in &c.slots {
                        if let Value::Node(n) = v {
                            if !declared.contains(n) && !buffers.contains(n) && *n != top {
                                self.err(c.span, format!("reference `@{n}` names no chunk in `wm`"));
                            }
                        }
                    }
                }
            }
        }
    }

    fn production(&mut self, p: &Production, span: Span, cspans: &[Span], aspans: &[Span]) {
        let mode = self.ast.mode;
        self.user_name(span, "production name", &p.name);
        if let Some(op) = &p.operator {
            self.user_name(span, "operator name", op);
        }
        match (mode, p.role) {
            (Mode::Actr, Role::Plain) | (Mode::Soar, Role::Elaboration | Role::Proposal | Role::Evaluation | Role::Application) => {}
            (Mode::Actr, r) => self.err(span, format!("`{}` rules need soar mode", r.keyword())),
            (Mode::Soar, _) => self.err(span, "plain `rule` needs actr mode; use `elaboration`, `propose`, `evaluate` or `apply`"),
        }
        if p.rl && p.role != Role::Evaluation {
            self.err(span, "only `evaluate` rules can be `rl` rules");
        }
        if p.conditions.iter().all(|c| c.negated) {
            self.err(span, "a production needs at least one positive condition");
        }
        let bound = p.bound_vars();
        for (c, &cs) in p.conditions.iter().zip(cspans) {
            if let Some(e) = edge_word(&c.edge) {
                self.metadata_edge(cs, e);
            }
            let local: BTreeSet<&Symbol> = [&c.node, &c.edge, &c.value].into_iter().filter_map(Term::as_var).collect();
            for t in &c.tests {
                if let Term::Var(v) = &t.operand {
                    if !bound.contains(v) && !(c.negated && local.contains(v)) {
                        self.err(cs, format!("test operand `?{v}` is not bound by a positive condition"));
                    }
                }
            }
        }
        for (a, &s) in p.actions.iter().zip(aspans) {
            self.action(p, a, s, &bound);
        }
    }

    fn action(&mut self, p: &Production, a: &Action, span: Span, bound: &BTreeSet<Symbol>) {
        let mode = self.ast.mode;
        for t in a.terms() {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    self.err(span, format!("variable `?{v}` is not bound by a positive condition"));
                }
            }
        }
        let i_support = p.role.is_elaboration_phase();
        match a {
            Action::Add(pat) | Action::Remove(pat) => {
                match edge_word(&pat.edge) {
                    None => self.err(span, "action edges must be constant"),
                    Some(e) => {
                        self.metadata_edge(span, e);
                        if e == "status" {
                            self.err(span, "rules cannot write module status");
                        } else if ARCHITECTURE_EDGES.contains(&e) {
                            self.err(span, format!("`^{e}` is written only by the architecture"));
                        }
                    }
                }
                if matches!(a, Action::Remove(_)) && i_support {
                    self.err(span, format!("`{}` rules cannot remove elements", p.role.keyword()));
                }
                if mode == Mode::Actr && matches!(a, Action::Add(_)) {
                    if let Term::Const(v) = &pat.node {
                        let n = v.as_symbol().expect("parser gives symbolic nodes");
                        if !self.buffers.contains(n) {
                            self.err(span, format!("`{n}` is not a declared buffer; reach chunks through a bound variable"));
                        }
                    }
                }
            }
            Action::Clear(b) => {
                self.buffer(span, b);
                if i_support {
                    self.err(span, format!("`{}` rules cannot clear buffers", p.role.keyword()));
                }
            }
            Action::Command(c) => {
                let name = c.name.as_str();
                if !COMMAND_WORDS.contains(&name) {
                    let hint = suggest(name, COMMAND_WORDS.iter().copied().chain(["clear"]))
                        .map(|s| format!("; did you mean `!{s}`?"))
                        .unwrap_or_default();
                    self.err(span, format!("unknown command `!{name}`{hint}"));
                    return;
                }
                if let Some(b) = &c.buffer {
                    self.buffer(span, b);
                }
                if mode == Mode::Actr && SOAR_ONLY_COMMANDS.contains(&name) {
                    self.err(span, format!("`!{name}` needs soar mode"));
                }
                if mode == Mode::Soar && ACTR_ONLY_COMMANDS.contains(&name) {
                    self.err(span, format!("`!{name}` needs actr mode"));
                }
                if i_support {
                    self.err(span, format!("`{}` rules cannot issue module commands", p.role.keyword()));
                }
                let edges: Vec<&str> = match &c.args {
                    CommandArgs::Cue(items) => items.iter().map(|i| i.edge.as_str()).collect(),
                    CommandArgs::Episode(ps) => ps.iter().filter_map(|p| edge_word(&p.edge)).collect(),
                    _ => Vec::new(),
                };
                for e in edges {
                    self.metadata_edge(span, e);
                }
            }
            Action::Propose { operator, attrs, .. } => {
                self.user_name(span, "operator name", operator);
                if p.role != Role::Proposal {
                    self.err(span, "operators are proposed only by `propose` rules");
                }
                for (e, _) in attrs {
                    self.metadata_edge(span, e.as_str());
                    if e.as_str() == "name" {
                        self.err(span, "`^name` is set from the operator name");
                    }
                }
            }
            Action::Prefer { .. } => {
                if p.role != Role::Evaluation {
                    self.err(span, "preferences are given only by `evaluate` rules");
                }
            }
        }
    }

    fn buffer(&mut self, span: Span, b: &Symbol) {
        if !self.buffers.contains(b) {
            let hint = suggest(b.as_str(), self.buffers.iter().map(Symbol::as_str))
                .map(|s| format!("; did you mean `{s}`?"))
                .unwrap_or_default();
            self.err(span, format!("unknown buffer `{b}`{hint}"));
        }
    }
}

/// Checks a parsed model. The model is returned only when there are no
/// error diagnostics; warnings come back either way.
pub fn validate(ast: &ModelAst) -> (Option<Model>, Vec<Diagnostic>) {
    let buffers: Vec<Symbol> = match &ast.buffers {
        Some(list) => list.iter().map(|(b, _)| b.clone()).collect(),
        None => default_buffers(ast.mode),
    };
    let mut ck = Checker { ast, buffers: buffers.iter().cloned().collect(), diags: Vec::new() };
    if let Some(list) = &ast.buffers {
        let mut seen = BTreeSet::new();
        for (b, s) in list {
            ck.user_name(*s, "buffer name", b);
            if !seen.insert(b) {
                ck.warn(*s, format!("buffer `{b}` declared twice"));
            }
        }
    }
    let (config, pdiags) = RunConfig::from_params(ast.mode, &ast.params);
    ck.diags.extend(pdiags);
    if ast.mode == Mode::Soar && ck.buffers.contains(&config.top_state) {
        ck.err(ast.mode_span, format!("top state `{}` is also a buffer name", config.top_state));
    }
    ck.chunks(&ast.wm, "wm");
    ck.chunks(&ast.dm, "dm");
    ck.initial_wm();
    let mut names = BTreeSet::new();
    let proposed: BTreeSet<&Symbol> = ast
        .productions
        .iter()
        .flat_map(|d| &d.production.actions)
        .filter_map(|a| match a {
            Action::Propose { operator, .. } => Some(operator),
            _ => None,
        })
        .collect();
    for d in &ast.productions {
        let p = &d.production;
        if !names.insert(&p.name) {
            ck.err(d.span, format!("production `{}` is defined twice", p.name));
        }
        ck.production(p, d.span, &d.condition_spans, &d.action_spans);
        if let Some(op) = &p.operator {
            if !proposed.contains(op) {
                ck.warn(d.span, format!("no rule proposes operator `{op}`"));
            }
        }
    }
    let mut diags = ck.diags;
    crate::dsl::diag::sort(&mut diags);
    diags.dedup();
    if has_errors(&diags) {
        return (None, diags);
    }
    let model = Model {
        mode: ast.mode,
        config,
        buffers,
        wm: ast.wm.clone(),
        dm: ast.dm.clone(),
        env: ast.env.as_ref().map(|(f, _)| f.clone()),
        productions: ast.productions.iter().map(|d| d.production.clone()).collect(),
    };
    (Some(model), diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn check(src: &str) -> Vec<String> {
        let (ast, diags) = parse(src);
        assert!(diags.is_empty(), "parse: {diags:?}");
        validate(&ast).1.into_iter().map(|d| d.message).collect()
    }

    fn soar(body: &str) -> String {
        format!("cogm 1\nmode soar\n{body}")
    }

    #[test]
    fn status_write_is_a_wall_violation() {
        let m = check("cogm 1\nmode actr\nrule r { (goal ^x 1) --> +(retrieval ^status free) }");
        assert!(m.iter().any(|m| m.contains("cannot write module status")), "{m:?}");
        let m = check("cogm 1\nmode actr\nrule r { (goal ^x ?e) --> +(goal ^?e free) }");
        assert!(m.iter().any(|m| m.contains("edges must be constant")), "{m:?}");
    }

    #[test]
    fn metadata_is_unreachable() {
        let m = check(&soar("elaboration r { (s1 ^activation ?a) --> +(s1 ^seen ?a) }"));
        assert!(m.iter().any(|m| m.contains("architecture metadata")), "{m:?}");
        let m = check("cogm 1\nmode actr\nrule r { (goal ^x 1) --> !retrieve retrieval (^utility *) }");
        assert!(m.iter().any(|m| m.contains("architecture metadata")), "{m:?}");
    }

    #[test]
    fn unknown_command_gets_suggestion() {
        let m = check("cogm 1\nmode actr\nrule r { (goal ^x 1) --> !retrive retrieval (^a 1) }");
        assert_eq!(m, vec!["unknown command `!retrive`; did you mean `!retrieve`?".to_string()]);
    }

    #[test]
    fn unbound_variables() {
        let m = check("cogm 1\nmode actr\nrule r { (goal ^x ?a) -(goal ^y ?b) --> +(goal ^z ?b) }");
        assert!(m.iter().any(|m| m.contains("`?b` is not bound")), "{m:?}");
    }

    #[test]
    fn mode_specific_constructs() {
        let m = check("cogm 1\nmode actr\nelaboration e { (goal ^x 1) --> +(goal ^y 1) }");
        assert!(m[0].contains("need soar mode"));
        let m = check(&soar("rule r { (s1 ^x 1) --> +(s1 ^y 1) }"));
        assert!(m[0].contains("needs actr mode"));
        let m = check(&soar("elaboration e { (s1 ^x 1) --> operator s1 go }"));
        assert!(m.iter().any(|m| m.contains("only by `propose`")), "{m:?}");
        let m = check(&soar("propose p { (s1 ^x 1) --> -(s1 ^x 1) }"));
        assert!(m.iter().any(|m| m.contains("cannot remove")), "{m:?}");
    }

    #[test]
    fn initial_wm_placement() {
        let m = check("cogm 1\nmode actr\nwm { (goal ^payload @g1) (g1 ^a 1) (stray ^b 2) }");
        assert_eq!(m.len(), 1);
        assert!(m[0].contains("`stray` is outside every buffer"));
        let m = check(&soar("wm { (s1 ^task @t1) (t1 ^next @t9) (x1 ^a 1) }"));
        assert!(m.iter().any(|m| m.contains("`@t9` names no chunk")), "{m:?}");
        assert!(m.iter().any(|m| m.contains("`x1` is not linked")), "{m:?}");
    }

    #[test]
    fn innate_names_and_params() {
        let m = check("cogm 1\nmode actr\nbuffers { goal busy }\nparams { aplha = 0.1 }");
        assert!(m.iter().any(|m| m.contains("collides with the innate vocabulary")), "{m:?}");
        assert!(m.iter().any(|m| m.contains("did you mean `alpha`")), "{m:?}");
    }

    #[test]
    fn good_model_validates() {
        let src = soar(
            "wm { (s1 ^arms 2) }\n\
             propose p-left { (?s ^arms 2) --> operator ?s left }\n\
             evaluate v-left rl { (?s ^operator ?o) (?o ^name left) --> prefer ?o indifferent }\n\
             apply a-left for left { (?s ^selected ?o) (?o ^name left) --> !motor motor (press-left) }\n",
        );
        let (ast, _) = parse(&src);
        let (model, diags) = validate(&ast);
        assert!(diags.is_empty(), "{diags:?}");
        let model = model.unwrap();
        assert_eq!(model.productions.len(), 3);
        assert_eq!(model.buffers, default_buffers(Mode::Soar));
    }
}

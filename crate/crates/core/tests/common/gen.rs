//! Random model syntax trees for round-trip and fuzz tests.

use cogkernel::dsl::ast::{ChunkDecl, ModelAst, Param, ProductionDecl};
use cogkernel::dsl::Span;
use cogkernel::procedural::{
    Action, CommandAction, CommandArgs, Condition, CueItem, CueTest, Origin, Pattern, PrefKind, Production, Role,
    Term, TestOp, ValueTest,
};
use cogkernel::{Mode, Symbol, Value};
use rand::seq::SliceRandom;
use rand::Rng;

const ATOMS: [&str; 14] =
    ["goal", "color", "red", "blue", "count", "next", "left", "right", "task", "x1", "y2", "item-a", "fact_b", "size"];
const VARS: [&str; 7] = ["a", "b", "n", "x", "y", "o", "s"];
const STRINGS: [&str; 5] = ["", "hello", "two words", "say \"hi\"", "back\\slash\ttab"];
const ROLES: [Role; 5] = [Role::Plain, Role::Elaboration, Role::Proposal, Role::Evaluation, Role::Application];

fn atom<R: Rng>(r: &mut R) -> Symbol {
    Symbol::named(ATOMS.choose(r).unwrap())
}

fn number<R: Rng>(r: &mut R) -> f64 {
    match r.gen_range(0..3) {
        0 => r.gen_range(-20..20) as f64,
        1 => r.gen_range(-40..40) as f64 / 4.0,
        _ => r.gen_range(-1e6..1e6),
    }
}

pub fn constant<R: Rng>(r: &mut R) -> Value {
    match r.gen_range(0..6) {
        0 | 1 => Value::Sym(atom(r)),
        2 => Value::Node(atom(r)),
        3 | 4 => Value::Num(number(r)),
        _ => Value::Str(STRINGS.choose(r).unwrap().to_string()),
    }
}

fn var<R: Rng>(r: &mut R) -> Term {
    Term::Var(Symbol::named(VARS.choose(r).unwrap()))
}

fn term<R: Rng>(r: &mut R) -> Term {
    if r.gen_bool(0.4) {
        var(r)
    } else {
        Term::Const(constant(r))
    }
}

fn node<R: Rng>(r: &mut R) -> Term {
    match r.gen_range(0..3) {
        0 => var(r),
        1 => Term::Const(Value::Sym(atom(r))),
        _ => Term::Const(Value::Node(atom(r))),
    }
}

fn edge<R: Rng>(r: &mut R) -> Term {
    if r.gen_bool(0.2) {
        var(r)
    } else {
        Term::Const(Value::Sym(atom(r)))
    }
}

fn pattern<R: Rng>(r: &mut R) -> Pattern {
    Pattern::new(node(r), edge(r), term(r))
}

fn condition<R: Rng>(r: &mut R) -> Condition {
    let ops = [TestOp::Ne, TestOp::Lt, TestOp::Gt, TestOp::Le, TestOp::Ge];
    Condition {
        negated: r.gen_bool(0.25),
        node: node(r),
        edge: edge(r),
        value: term(r),
        tests: (0..r.gen_range(0..3)).map(|_| ValueTest { op: *ops.choose(r).unwrap(), operand: term(r) }).collect(),
    }
}

fn cue_test<R: Rng>(r: &mut R) -> CueTest<Term> {
    match r.gen_range(0..7) {
        0 => CueTest::Present,
        1 => CueTest::Ne(term(r)),
        2 => CueTest::Lt(term(r)),
        3 => CueTest::Gt(term(r)),
        4 => CueTest::Le(term(r)),
        5 => CueTest::Ge(term(r)),
        _ => CueTest::Eq(term(r)),
    }
}

fn command<R: Rng>(r: &mut R) -> Action {
    let cmd = |name: &str, buffer: Option<Symbol>, args| {
        Action::Command(CommandAction { name: Symbol::named(name), buffer, args })
    };
    let buffer = Some(atom(r));
    match r.gen_range(0..9) {
        0 => Action::Clear(atom(r)),
        1 | 2 => {
            let name = if r.gen_bool(0.5) { "retrieve" } else { "retrieve-blend" };
            let items = (0..r.gen_range(0..4)).map(|_| CueItem { edge: atom(r), test: cue_test(r) }).collect();
            cmd(name, buffer, CommandArgs::Cue(items))
        }
        3 => {
            let depth = r.gen_bool(0.5).then(|| r.gen_range(0..5));
            cmd("retrieve-name", buffer, CommandArgs::Name { name: node(r), depth })
        }
        4 => cmd("em-query", buffer, CommandArgs::Episode((0..r.gen_range(1..3)).map(|_| pattern(r)).collect())),
        5 => cmd(if r.gen_bool(0.5) { "em-next" } else { "em-prev" }, buffer, CommandArgs::None),
        6 => cmd("store", None, CommandArgs::Terms(vec![node(r)])),
        7 => cmd("motor", buffer, CommandArgs::Terms((0..r.gen_range(0..4)).map(|_| term(r)).collect())),
        _ => cmd("halt", None, CommandArgs::None),
    }
}

fn action<R: Rng>(r: &mut R) -> Action {
    match r.gen_range(0..6) {
        0 => Action::Add(pattern(r)),
        1 => Action::Remove(pattern(r)),
        2 | 3 => command(r),
        4 => Action::Propose {
            state: node(r),
            operator: atom(r),
            attrs: (0..r.gen_range(0..3)).map(|_| (atom(r), term(r))).collect(),
        },
        _ => {
            let kind = *PrefKind::ALL.choose(r).unwrap();
            Action::Prefer { operator: node(r), kind, other: kind.is_binary().then(|| node(r)) }
        }
    }
}

pub fn production<R: Rng>(r: &mut R, index: usize) -> Production {
    let role = *ROLES.choose(r).unwrap();
    let mut p = Production::new(
        &format!("p{index}-{}", ATOMS.choose(r).unwrap()),
        role,
        (0..r.gen_range(1..5)).map(|_| condition(r)).collect(),
        (0..r.gen_range(0..4)).map(|_| action(r)).collect(),
    );
    if role == Role::Application {
        p.operator = Some(atom(r));
    }
    if r.gen_bool(0.3) {
        p.utility = Some(number(r));
    }
    p.rl = r.gen_bool(0.2);
    p.origin = *[Origin::HandWritten, Origin::HandWritten, Origin::Compiled, Origin::Chunked].choose(r).unwrap();
    p
}

fn chunk<R: Rng>(r: &mut R) -> ChunkDecl {
    ChunkDecl {
        node: atom(r),
        slots: (0..r.gen_range(1..4)).map(|_| (atom(r), constant(r))).collect(),
        span: Span::default(),
    }
}

pub fn model_ast<R: Rng>(r: &mut R) -> ModelAst {
    let mode = if r.gen_bool(0.5) { Mode::Actr } else { Mode::Soar };
    let mut ast = ModelAst::empty(mode);
    if r.gen_bool(0.5) {
        ast.buffers = Some((0..r.gen_range(0..4)).map(|_| (atom(r), Span::default())).collect());
    }
    ast.params = (0..r.gen_range(0..3))
        .map(|_| Param { name: atom(r), value: constant(r), span: Span::default() })
        .collect();
    ast.wm = (0..r.gen_range(0..3)).map(|_| chunk(r)).collect();
    ast.dm = (0..r.gen_range(0..3)).map(|_| chunk(r)).collect();
    if r.gen_bool(0.3) {
        ast.env = Some((STRINGS.choose(r).unwrap().to_string(), Span::default()));
    }
    ast.productions = (0..r.gen_range(0..5))
        .map(|i| {
            let p = production(r, i);
            ProductionDecl {
                span: Span::default(),
                condition_spans: vec![Span::default(); p.conditions.len()],
                action_spans: vec![Span::default(); p.actions.len()],
                production: p,
            }
        })
        .collect();
    ast
}

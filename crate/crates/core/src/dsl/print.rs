//! Canonical text form of a model. Parsing the output gives back an equal
//! tree, and printing is idempotent.

use std::fmt::Write as _;

use crate::data::{format_number, Value};
use crate::dsl::ast::{ChunkDecl, ModelAst};
use crate::procedural::{Action, CommandArgs, Condition, CueItem, Origin, Pattern, Production, Term};

fn edge(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("^?{v}"),
        Term::Const(Value::Sym(s) | Value::Node(s)) => format!("^{s}"),
        Term::Const(other) => format!("^{other}"),
    }
}

fn pattern(p: &Pattern) -> String {
    format!("{} {} {}", p.node, edge(&p.edge), p.value)
}

pub fn condition(c: &Condition) -> String {
    let mut s = String::from(if c.negated { "-(" } else { "(" });
    let _ = write!(s, "{} {} {}", c.node, edge(&c.edge), c.value);
    for t in &c.tests {
        let _ = write!(s, " {} {}", t.op.text(), t.operand);
    }
    s.push(')');
    s
}

fn cue(items: &[CueItem]) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|i| match i.test.operand() {
            Some(t) => format!("^{} {}{}", i.edge, i.test.prefix(), t),
            None => format!("^{} *", i.edge),
        })
        .collect();
    format!("({})", parts.join(" "))
}

pub fn action(a: &Action) -> String {
    match a {
        Action::Add(p) => format!("+({})", pattern(p)),
        Action::Remove(p) => format!("-({})", pattern(p)),
        Action::Clear(b) => format!("!clear {b}"),
        Action::Command(c) => {
            let mut s = format!("!{}", c.name);
            if let Some(b) = &c.buffer {
                let _ = write!(s, " {b}");
            }
            match &c.args {
                CommandArgs::None => {}
                CommandArgs::Cue(items) => {
                    let _ = write!(s, " {}", cue(items));
                }
                CommandArgs::Name { name, depth } => {
                    let _ = write!(s, " {name}");
                    if let Some(d) = depth {
                        let _ = write!(s, " depth {d}");
                    }
                }
                CommandArgs::Episode(ps) => {
                    for p in ps {
                        let _ = write!(s, " ({})", pattern(p));
                    }
                }
                CommandArgs::Terms(ts) if c.name.as_str() == "store" => {
                    for t in ts {
                        let _ = write!(s, " {t}");
                    }
                }
                CommandArgs::Terms(ts) => {
                    let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                    let _ = write!(s, " ({})", parts.join(" "));
                }
                CommandArgs::Raw(toks) => {
                    for t in toks {
                        let _ = write!(s, " {t}");
                    }
                }
            }
            s
        }
        Action::Propose { state, operator, attrs } => {
            let mut s = format!("operator {state} {operator}");
            for (e, v) in attrs {
                let _ = write!(s, " ^{e} {v}");
            }
            s
        }
        Action::Prefer { operator, kind, other } => match other {
            Some(o) => format!("prefer {operator} {} {o}", kind.word()),
            None => format!("prefer {operator} {}", kind.word()),
        },
    }
}

/// One production in canonical layout, ending with a newline.
pub fn production(p: &Production) -> String {
    let mut s = String::new();
    if p.origin != Origin::HandWritten {
        let _ = writeln!(s, "# learned ({})", p.origin.word());
    }
    let _ = write!(s, "{} {}", p.role.keyword(), p.name);
    if let Some(op) = &p.operator {
        let _ = write!(s, " for {op}");
    }
    if let Some(u) = p.utility {
        let _ = write!(s, " utility {}", format_number(u));
    }
    if p.rl {
        s.push_str(" rl");
    }
    if p.origin != Origin::HandWritten {
        let _ = write!(s, " origin {}", p.origin.word());
    }
    s.push_str(" {\n");
    for c in &p.conditions {
        let _ = writeln!(s, "  {}", condition(c));
    }
    s.push_str("-->\n");
    for a in &p.actions {
        let _ = writeln!(s, "  {}", action(a));
    }
    s.push_str("}\n");
    s
}

fn chunk(c: &ChunkDecl) -> String {
    let mut s = format!("({}", c.node);
    for (e, v) in &c.slots {
        let _ = write!(s, " ^{e} {v}");
    }
    s.push(')');
    s
}

fn chunk_block(out: &mut String, word: &str, chunks: &[ChunkDecl]) {
    if chunks.is_empty() {
        return;
    }
    let _ = writeln!(out, "\n{word} {{");
    for c in chunks {
        let _ = writeln!(out, "  {}", chunk(c));
    }
    out.push_str("}\n");
}

pub fn model(ast: &ModelAst) -> String {
    let mut out = format!("cogm 1\nmode {}\n", ast.mode.word());
    if let Some(bs) = &ast.buffers {
        let names: Vec<&str> = bs.iter().map(|(b, _)| b.as_str()).collect();
        if names.is_empty() {
            out.push_str("\nbuffers { }\n");
        } else {
            let _ = writeln!(out, "\nbuffers {{ {} }}", names.join(" "));
        }
    }
    if !ast.params.is_empty() {
        out.push_str("\nparams {\n");
        for p in &ast.params {
            let _ = writeln!(out, "  {} = {}", p.name, p.value);
        }
        out.push_str("}\n");
    }
    chunk_block(&mut out, "wm", &ast.wm);
    chunk_block(&mut out, "dm", &ast.dm);
    if let Some((file, _)) = &ast.env {
        let _ = writeln!(out, "\nenv {}", Value::Str(file.clone()));
    }
    for d in &ast.productions {
        out.push('\n');
        out.push_str(&production(&d.production));
    }
    out
}

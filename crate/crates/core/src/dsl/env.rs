//! Environment scripts: canned responses to motor commands, timed
//! percepts and timed rewards.
//!
//! ```text
//! motor press-left latency 100 status success percept { (p1 ^payoff 1) }
//! motor "press right" latency 100 status failure
//! percept at 500 { (light ^color red) }
//! reward 10 at 300
//! ```
//!
//! A motor command is looked up by the text of its arguments joined with
//! single spaces.

use std::collections::BTreeMap;

use crate::data::Ms;
use crate::dsl::ast::ChunkDecl;
use crate::dsl::diag::{self, Diagnostic};
use crate::dsl::lexer::{Span, Tok};
use crate::dsl::parser::{Parser, P};

#[derive(Debug, Clone, PartialEq)]
pub struct MotorResponse {
    pub command: String,
    pub latency: Ms,
    pub success: bool,
    pub percept: Option<ChunkDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedPercept {
    pub at: Ms,
    pub chunk: ChunkDecl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedReward {
    pub amount: f64,
    pub at: Ms,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvScript {
    pub motor: BTreeMap<String, MotorResponse>,
    pub percepts: Vec<ScriptedPercept>,
    pub rewards: Vec<ScriptedReward>,
}

impl EnvScript {
    pub fn response(&self, command: &str) -> Option<&MotorResponse> {
        self.motor.get(command)
    }
}

fn is_entry_start(t: &Tok) -> bool {
    matches!(t, Tok::Ident(w) if matches!(w.as_str(), "motor" | "percept" | "reward"))
}

fn single_chunk(p: &mut Parser) -> P<ChunkDecl> {
    p.expect(&Tok::LBrace)?;
    let c = p.chunk_decl()?;
    p.expect(&Tok::RBrace)?;
    Ok(c)
}

fn entry(p: &mut Parser, script: &mut EnvScript) -> P<()> {
    let span = p.span();
    let (word, _) = p.ident("`motor`, `percept` or `reward`")?;
    match word.as_str() {
        "motor" => {
            let command = match p.bump().map(|t| t.tok) {
                Some(Tok::Ident(s) | Tok::Str(s)) => s,
                _ => {
                    p.diags.push(Diagnostic::error(span, "expected a command name after `motor`"));
                    return Err(());
                }
            };
            p.keyword("latency")?;
            let latency = p.count("latency")?;
            p.keyword("status")?;
            let (st, sspan) = p.ident("`success` or `failure`")?;
            let success = match st.as_str() {
                "success" => true,
                "failure" => false,
                _ => {
                    p.diags.push(Diagnostic::error(sspan, format!("status must be `success` or `failure`, not `{st}`")));
                    return Err(());
                }
            };
            let percept = if p.is_ident("percept") && p.peek_nth(1) == Some(&Tok::LBrace) {
                p.bump();
                Some(single_chunk(p)?)
            } else {
                None
            };
            if script.motor.contains_key(&command) {
                p.diags.push(Diagnostic::error(span, format!("motor command `{command}` is scripted twice")));
                return Err(());
            }
            script.motor.insert(command.clone(), MotorResponse { command, latency, success, percept, span });
        }
        "percept" => {
            p.keyword("at")?;
            let at = p.count("time")?;
            let chunk = single_chunk(p)?;
            script.percepts.push(ScriptedPercept { at, chunk });
        }
        "reward" => {
            let amount = p.number("a reward amount")?;
            p.keyword("at")?;
            let at = p.count("time")?;
            script.rewards.push(ScriptedReward { amount, at });
        }
        other => {
            p.diags.push(Diagnostic::error(span, format!("unknown entry `{other}`; expected `motor`, `percept` or `reward`")));
            return Err(());
        }
    }
    Ok(())
}

pub fn parse_env(src: &str) -> Result<EnvScript, Vec<Diagnostic>> {
    let mut p = Parser::new(src);
    let mut script = EnvScript::default();
    while !p.at_end() {
        let start = p.pos();
        if entry(&mut p, &mut script).is_err() {
            p.sync_to(start, is_entry_start);
        }
    }
    let mut diags = p.diags;
    diag::sort(&mut diags);
    diags.dedup();
    if diag::has_errors(&diags) {
        return Err(diags);
    }
    script.percepts.sort_by_key(|x| x.at);
    script.rewards.sort_by_key(|x| x.at);
    Ok(script)
}

//! Text snapshots of the semantic and episodic stores.
//!
//! ```text
//! cogdm 1
//! chunk NAME last T|- accesses T...
//! slot EDGE VALUE
//! slotacc EDGE VALUE T...
//! assoc SOURCE TARGET T...
//! episode CYCLE TIME
//! event NODE EDGE VALUE ADDED REMOVED|open
//! checksum SHA256-HEX
//! ```
//!
//! `slot` and `slotacc` lines belong to the preceding `chunk`. Everything is
//! written in sorted order, so saving the same stores twice gives the same
//! bytes. The checksum covers every byte before the checksum line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::{Ms, Triple, Value};
use crate::declarative::episodic::{EmEvent, EpisodicStore};
use crate::declarative::semantic::{SemanticStore, StoredChunk};
use crate::error::SnapshotError;
use crate::symbol::Symbol;

pub const HEADER: &str = "cogdm 1";

fn times(out: &mut String, ts: &[Ms]) {
    for t in ts {
        let _ = write!(out, " {t}");
    }
}

/// Serializes both stores.
pub fn to_text(sm: &SemanticStore, em: &EpisodicStore) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for c in sm.chunks() {
        let last = c.last_retrieved.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
        let _ = write!(out, "chunk {} last {} accesses", c.name, last);
        times(&mut out, &c.accesses);
        out.push('\n');
        for (e, v) in &c.slots {
            let _ = writeln!(out, "slot {e} {v}");
        }
        for ((e, v), ts) in &c.slot_accesses {
            let _ = write!(out, "slotacc {e} {v}");
            times(&mut out, ts);
            out.push('\n');
        }
    }
    for ((s, t), ts) in sm.associations() {
        let _ = write!(out, "assoc {s} {t}");
        times(&mut out, ts);
        out.push('\n');
    }
    for (cycle, time) in em.episodes() {
        let _ = writeln!(out, "episode {cycle} {time}");
    }
    for e in em.events() {
        let _ = writeln!(out, "event {}", event_fields(e));
    }
    let sum = hex::encode(Sha256::digest(out.as_bytes()));
    let _ = writeln!(out, "checksum {sum}");
    out
}

fn event_fields(e: &EmEvent) -> String {
    let removed = e.removed.map(|t| t.to_string()).unwrap_or_else(|| "open".into());
    format!("{} {} {} {} {}", e.triple.node, e.triple.edge, e.triple.value, e.added, removed)
}

/// Splits a line into tokens; double-quoted strings may contain spaces.
fn tokens(line: &str, n: usize) -> Result<Vec<String>, SnapshotError> {
    let err = |message: &str| SnapshotError::Parse { line: n, message: message.to_string() };
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut tok = String::new();
        if c == '"' {
            tok.push(chars.next().unwrap());
            loop {
                match chars.next() {
                    None => return Err(err("unterminated string")),
                    Some('\\') => {
                        tok.push('\\');
                        tok.push(chars.next().ok_or_else(|| err("dangling escape"))?);
                    }
                    Some('"') => {
                        tok.push('"');
                        break;
                    }
                    Some(ch) => tok.push(ch),
                }
            }
        } else {
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                tok.push(ch);
                chars.next();
            }
        }
        out.push(tok);
    }
    Ok(out)
}

/// Reads a value token as written by `Value`'s `Display`.
pub fn parse_value(tok: &str) -> Option<Value> {
    if let Some(rest) = tok.strip_prefix('@') {
        return (!rest.is_empty()).then(|| Value::Node(Symbol::named(rest)));
    }
    if let Some(body) = tok.strip_prefix('"') {
        let body = body.strip_suffix('"')?;
        let mut s = String::new();
        let mut it = body.chars();
        while let Some(c) = it.next() {
            if c == '\\' {
                s.push(match it.next()? {
                    'n' => '\n',
                    't' => '\t',
                    'r' => '\r',
                    other => other,
                });
            } else {
                s.push(c);
            }
        }
        return Some(Value::Str(s));
    }
    let first = tok.chars().next()?;
    if first.is_ascii_digit() || ((first == '-' || first == '+' || first == '.') && tok.len() > 1) {
        if let Ok(n) = tok.parse::<f64>() {
            return Some(Value::Num(n));
        }
    }
    Some(Value::Sym(Symbol::named(tok)))
}

fn parse_ms(tok: &str, n: usize) -> Result<Ms, SnapshotError> {
    tok.parse().map_err(|_| SnapshotError::Parse { line: n, message: format!("bad time {tok:?}") })
}

/// Parses a snapshot, checking the header and checksum first.
pub fn from_text(text: &str) -> Result<(SemanticStore, EpisodicStore), SnapshotError> {
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| SnapshotError::Header("missing checksum".into()))?;
    let (body, last) = text.split_at(body_end);
    let expected = last
        .trim_end()
        .strip_prefix("checksum ")
        .ok_or_else(|| SnapshotError::Header("missing checksum".into()))?;
    let found = hex::encode(Sha256::digest(body.as_bytes()));
    if expected != found {
        return Err(SnapshotError::Checksum { expected: expected.to_string(), found });
    }
    let mut lines = body.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, HEADER)) => {}
        other => return Err(SnapshotError::Header(other.map(|(_, l)| l.to_string()).unwrap_or_default())),
    }

    let mut sm = SemanticStore::new();
    let mut episodes = Vec::new();
    let mut events = Vec::new();
    let mut current: Option<StoredChunk> = None;
    let value = |tok: &str, n: usize| {
        parse_value(tok).ok_or_else(|| SnapshotError::Parse { line: n, message: format!("bad value {tok:?}") })
    };
    for (n, line) in lines {
        let t = tokens(line, n)?;
        let bad = |m: &str| SnapshotError::Parse { line: n, message: m.to_string() };
        match t.first().map(String::as_str) {
            Some("chunk") => {
                if t.len() < 5 || t[2] != "last" || t[4] != "accesses" {
                    return Err(bad("malformed chunk line"));
                }
                if let Some(c) = current.take() {
                    sm.insert(c);
                }
                current = Some(StoredChunk {
                    name: Symbol::named(&t[1]),
                    slots: Vec::new(),
                    last_retrieved: if t[3] == "-" { None } else { Some(parse_ms(&t[3], n)?) },
                    accesses: t[5..].iter().map(|x| parse_ms(x, n)).collect::<Result<_, _>>()?,
                    slot_accesses: BTreeMap::new(),
                });
            }
            Some("slot") if t.len() == 3 => {
                let c = current.as_mut().ok_or_else(|| bad("slot outside chunk"))?;
                c.slots.push((Symbol::named(&t[1]), value(&t[2], n)?));
            }
            Some("slotacc") if t.len() >= 3 => {
                let c = current.as_mut().ok_or_else(|| bad("slot outside chunk"))?;
                let ts = t[3..].iter().map(|x| parse_ms(x, n)).collect::<Result<_, _>>()?;
                c.slot_accesses.insert((Symbol::named(&t[1]), value(&t[2], n)?), ts);
            }
            Some("assoc") if t.len() >= 3 => {
                let ts = t[3..].iter().map(|x| parse_ms(x, n)).collect::<Result<_, _>>()?;
                sm.set_association(Symbol::named(&t[1]), Symbol::named(&t[2]), ts);
            }
            Some("episode") if t.len() == 3 => {
                let cycle = t[1].parse().map_err(|_| bad("bad cycle"))?;
                episodes.push((cycle, parse_ms(&t[2], n)?));
            }
            Some("event") if t.len() == 6 => {
                let triple = Triple::new(Symbol::named(&t[1]), Symbol::named(&t[2]), value(&t[3], n)?);
                let removed = if t[5] == "open" { None } else { Some(parse_ms(&t[5], n)?) };
                events.push(EmEvent { triple, added: parse_ms(&t[4], n)?, removed });
            }
            _ => return Err(bad("unrecognized line")),
        }
    }
    if let Some(c) = current.take() {
        sm.insert(c);
    }
    Ok((sm, EpisodicStore::from_parts(events, episodes)))
}

pub fn save(path: &Path, sm: &SemanticStore, em: &EpisodicStore) -> Result<(), SnapshotError> {
    std::fs::write(path, to_text(sm, em))?;
    Ok(())
}

/// Loads a snapshot; nothing is returned unless the whole file is valid.
pub fn load(path: &Path) -> Result<(SemanticStore, EpisodicStore), SnapshotError> {
    let text = std::fs::read_to_string(path)?;
    from_text(&text)
}

/// The episodic event log alone: one `event` line per interval.
pub fn event_log(em: &EpisodicStore) -> String {
    em.events().iter().map(|e| format!("{}\n", event_fields(e))).collect()
}

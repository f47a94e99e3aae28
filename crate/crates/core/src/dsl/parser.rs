//! Recursive-descent parser with item-level error recovery.
//!
//! Braces are matched in a pre-pass first; each token then knows its brace
//! depth, and after an error the parser skips to the next top-level keyword
//! at depth zero. One bad production therefore costs one diagnostic, and
//! the rest of the file is still checked.

use crate::data::Value;
use crate::dsl::ast::{ChunkDecl, ModelAst, Param, ProductionDecl};
use crate::dsl::diag::Diagnostic;
use crate::dsl::lexer::{lex, Span, Tok, Token};
use crate::procedural::{
    Action, CommandAction, CommandArgs, Condition, CueItem, CueTest, Origin, Pattern, PrefKind,
    Production, Role, Term, TestOp, ValueTest,
};
use crate::symbol::Symbol;
use crate::wm::Mode;

const TOP_KEYWORDS: [&str; 12] = [
    "cogm", "mode", "buffers", "params", "wm", "dm", "env", "rule", "elaboration", "propose", "evaluate", "apply",
];

pub(crate) type P<T> = Result<T, ()>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    depth: Vec<u32>,
    pos: usize,
    eof: Span,
    pub(crate) diags: Vec<Diagnostic>,
}

fn role_of(word: &str) -> Option<Role> {
    Some(match word {
        "rule" => Role::Plain,
        "elaboration" => Role::Elaboration,
        "propose" => Role::Proposal,
        "evaluate" => Role::Evaluation,
        "apply" => Role::Application,
        _ => return None,
    })
}

impl Parser {
    pub(crate) fn new(src: &str) -> Parser {
        let toks = lex(src);
        let eof = match src.lines().count() {
            0 => Span { line: 1, col: 1 },
            n => Span { line: n as u32, col: src.lines().last().map_or(0, |l| l.chars().count()) as u32 + 1 },
        };
        let mut diags = Vec::new();
        let mut depth = Vec::with_capacity(toks.len());
        let mut open: Vec<Span> = Vec::new();
        for t in &toks {
            match t.tok {
                Tok::LBrace => {
                    depth.push(open.len() as u32);
                    open.push(t.span);
                }
                Tok::RBrace => {
                    if open.pop().is_none() {
                        diags.push(Diagnostic::error(t.span, "unmatched `}`"));
                    }
                    depth.push(open.len() as u32);
                }
                _ => depth.push(open.len() as u32),
            }
        }
        for span in open {
            diags.push(Diagnostic::error(span, "unclosed `{`"));
        }
        for t in &toks {
            match &t.tok {
                Tok::Stray(c) => diags.push(Diagnostic::error(t.span, format!("unexpected character {c:?}"))),
                Tok::Unterminated => diags.push(Diagnostic::error(t.span, "unterminated string")),
                _ => {}
            }
        }
        Parser { toks, depth, pos: 0, eof, diags }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn peek_nth(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub(crate) fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.eof, |t| t.span)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn fail<T>(&mut self, message: impl Into<String>) -> P<T> {
        let span = self.span();
        let found = match self.peek() {
            Some(Tok::Stray(_) | Tok::Unterminated) => return Err(()),
            Some(t) => format!(", found {t}"),
            None => ", found end of input".to_string(),
        };
        self.diags.push(Diagnostic::error(span, format!("{}{found}", message.into())));
        Err(())
    }

    pub(crate) fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == word)
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> P<Span> {
        let span = self.span();
        if self.eat(tok) {
            Ok(span)
        } else {
            self.fail(format!("expected {tok}"))
        }
    }

    pub(crate) fn keyword(&mut self, word: &str) -> P<Span> {
        let span = self.span();
        if self.is_ident(word) {
            self.pos += 1;
            Ok(span)
        } else {
            self.fail(format!("expected `{word}`"))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> P<(String, Span)> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, span))
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    pub(crate) fn number(&mut self, what: &str) -> P<f64> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.fail(format!("expected {what}")),
        }
    }

    /// A non-negative whole number.
    pub(crate) fn count(&mut self, what: &str) -> P<u64> {
        let span = self.span();
        let n = self.number(what)?;
        if n >= 0.0 && n.fract() == 0.0 && n <= u64::MAX as f64 {
            Ok(n as u64)
        } else {
            self.diags.push(Diagnostic::error(span, format!("{what} must be a non-negative whole number")));
            Err(())
        }
    }

    fn at_top_keyword(&self) -> bool {
        self.depth.get(self.pos) == Some(&0)
            && matches!(self.peek(), Some(Tok::Ident(w)) if TOP_KEYWORDS.contains(&w.as_str()))
    }

    /// Skips to the next top-level item, always making progress.
    fn sync(&mut self, start: usize) {
        if self.pos <= start {
            self.pos = start + 1;
        }
        while !self.at_end() && !self.at_top_keyword() {
            self.pos += 1;
        }
    }

    /// Skips to the start of the next line item when not at one. Used by
    /// formats without braces.
    pub(crate) fn sync_to(&mut self, start: usize, stop: impl Fn(&Tok) -> bool) {
        if self.pos <= start {
            self.pos = start + 1;
        }
        while let Some(t) = self.peek() {
            if stop(t) {
                break;
            }
            self.pos += 1;
        }
    }

    // ------------------------------------------------------------------
    // Values and terms
    // ------------------------------------------------------------------

    /// A constant: symbol, node reference, number or string.
    pub(crate) fn constant(&mut self, what: &str) -> P<Value> {
        let v = match self.peek() {
            Some(Tok::Ident(s)) => Value::Sym(Symbol::named(s)),
            Some(Tok::Node(s)) => Value::Node(Symbol::named(s)),
            Some(Tok::Num(n)) => Value::Num(*n),
            Some(Tok::Str(s)) => Value::Str(s.clone()),
            _ => return self.fail(format!("expected {what}")),
        };
        self.pos += 1;
        Ok(v)
    }

    fn term(&mut self, what: &str) -> P<Term> {
        if let Some(Tok::Var(v)) = self.peek() {
            let t = Term::Var(Symbol::named(v));
            self.pos += 1;
            return Ok(t);
        }
        Ok(Term::Const(self.constant(what)?))
    }

    fn node_term(&mut self) -> P<Term> {
        match self.peek() {
            Some(Tok::Var(_) | Tok::Ident(_) | Tok::Node(_)) => self.term("a node"),
            _ => self.fail("expected a node"),
        }
    }

    fn edge_term(&mut self) -> P<Term> {
        let t = match self.peek() {
            Some(Tok::Edge(e)) => Term::Const(Value::Sym(Symbol::named(e))),
            Some(Tok::EdgeVar(v)) => Term::Var(Symbol::named(v)),
            _ => return self.fail("expected `^edge`"),
        };
        self.pos += 1;
        Ok(t)
    }

    fn edge_name(&mut self) -> P<Symbol> {
        match self.peek() {
            Some(Tok::Edge(e)) => {
                let s = Symbol::named(e);
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected `^edge`"),
        }
    }

    fn pattern_body(&mut self) -> P<Pattern> {
        let node = self.node_term()?;
        let edge = self.edge_term()?;
        let value = self.term("a value")?;
        self.expect(&Tok::RParen)?;
        Ok(Pattern { node, edge, value })
    }

    /// `(name ^edge value ...)` with constant values only.
    pub(crate) fn chunk_decl(&mut self) -> P<ChunkDecl> {
        let span = self.expect(&Tok::LParen)?;
        let node = match self.peek() {
            Some(Tok::Ident(s) | Tok::Node(s)) => Symbol::named(s),
            _ => return self.fail("expected a chunk name"),
        };
        self.pos += 1;
        let mut slots = Vec::new();
        while !self.eat(&Tok::RParen) {
            let edge = self.edge_name()?;
            let value = self.constant("a constant value")?;
            slots.push((edge, value));
        }
        if slots.is_empty() {
            self.diags.push(Diagnostic::error(span, "a chunk needs at least one slot"));
            return Err(());
        }
        Ok(ChunkDecl { node, slots, span })
    }

    fn chunk_block(&mut self) -> P<Vec<ChunkDecl>> {
        self.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            out.push(self.chunk_decl()?);
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // Productions
    // ------------------------------------------------------------------

    fn condition(&mut self) -> P<Condition> {
        let negated = match self.peek() {
            Some(Tok::LParen) => false,
            Some(Tok::NegParen) => true,
            _ => return self.fail("expected a condition or `-->`"),
        };
        self.pos += 1;
        let node = self.node_term()?;
        let edge = self.edge_term()?;
        let value = self.term("a value")?;
        let mut tests = Vec::new();
        loop {
            let op = match self.peek() {
                Some(Tok::Ne) => TestOp::Ne,
                Some(Tok::Lt) => TestOp::Lt,
                Some(Tok::Gt) => TestOp::Gt,
                Some(Tok::Le) => TestOp::Le,
                Some(Tok::Ge) => TestOp::Ge,
                _ => break,
            };
            self.pos += 1;
            tests.push(ValueTest { op, operand: self.term("a test operand")? });
        }
        self.expect(&Tok::RParen)?;
        Ok(Condition { negated, node, edge, value, tests })
    }

    fn cue_items(&mut self) -> P<Vec<CueItem>> {
        self.expect(&Tok::LParen)?;
        let mut items = Vec::new();
        while !self.eat(&Tok::RParen) {
            let edge = self.edge_name()?;
            let op = self.peek().cloned();
            let test = match op {
                Some(Tok::Star) => {
                    self.pos += 1;
                    CueTest::Present
                }
                Some(Tok::Ne | Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge) => {
                    self.pos += 1;
                    let t = self.term("a cue operand")?;
                    match op {
                        Some(Tok::Ne) => CueTest::Ne(t),
                        Some(Tok::Lt) => CueTest::Lt(t),
                        Some(Tok::Gt) => CueTest::Gt(t),
                        Some(Tok::Le) => CueTest::Le(t),
                        _ => CueTest::Ge(t),
                    }
                }
                _ => CueTest::Eq(self.term("a cue value")?),
            };
            items.push(CueItem { edge, test });
        }
        Ok(items)
    }

    fn buffer_name(&mut self) -> P<Symbol> {
        let (b, _) = self.ident("a buffer name")?;
        Ok(Symbol::named(&b))
    }

    fn at_action_start(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::PlusParen | Tok::NegParen | Tok::Bang(_) | Tok::RBrace))
            || self.is_ident("operator")
            || self.is_ident("prefer")
    }

    fn command(&mut self, name: &str) -> P<Action> {
        let cmd = |name: &str, buffer: Option<Symbol>, args| {
            Action::Command(CommandAction { name: Symbol::named(name), buffer, args })
        };
        Ok(match name {
            "clear" => Action::Clear(self.buffer_name()?),
            "retrieve" | "retrieve-blend" => {
                let b = self.buffer_name()?;
                cmd(name, Some(b), CommandArgs::Cue(self.cue_items()?))
            }
            "retrieve-name" => {
                let b = self.buffer_name()?;
                let target = self.term("a chunk name")?;
                let depth = if self.is_ident("depth") {
                    self.pos += 1;
                    Some(self.count("depth")?.min(u32::MAX as u64) as u32)
                } else {
                    None
                };
                cmd(name, Some(b), CommandArgs::Name { name: target, depth })
            }
            "em-query" => {
                let b = self.buffer_name()?;
                let mut pats = Vec::new();
                while self.eat(&Tok::LParen) {
                    pats.push(self.pattern_body()?);
                }
                if pats.is_empty() {
                    return self.fail("expected at least one `(node ^edge value)` cue");
                }
                cmd(name, Some(b), CommandArgs::Episode(pats))
            }
            "em-next" | "em-prev" => {
                let b = self.buffer_name()?;
                cmd(name, Some(b), CommandArgs::None)
            }
            "store" => {
                let t = self.node_term()?;
                cmd(name, None, CommandArgs::Terms(vec![t]))
            }
            "motor" => {
                let b = self.buffer_name()?;
                self.expect(&Tok::LParen)?;
                let mut terms = Vec::new();
                while !self.eat(&Tok::RParen) {
                    terms.push(self.term("a motor argument")?);
                }
                cmd(name, Some(b), CommandArgs::Terms(terms))
            }
            "halt" => cmd(name, None, CommandArgs::None),
            _ => {
                let mut raw = Vec::new();
                while !self.at_action_start() {
                    let t = self.bump().expect("not at end");
                    raw.push(raw_text(&t.tok));
                }
                cmd(name, None, CommandArgs::Raw(raw))
            }
        })
    }

    fn action(&mut self) -> P<Action> {
        match self.peek().cloned() {
            Some(Tok::PlusParen) => {
                self.pos += 1;
                Ok(Action::Add(self.pattern_body()?))
            }
            Some(Tok::NegParen) => {
                self.pos += 1;
                Ok(Action::Remove(self.pattern_body()?))
            }
            Some(Tok::Bang(name)) => {
                self.pos += 1;
                self.command(&name)
            }
            Some(Tok::Ident(w)) if w == "operator" => {
                self.pos += 1;
                let state = self.node_term()?;
                let (op, _) = self.ident("an operator name")?;
                let mut attrs = Vec::new();
                while matches!(self.peek(), Some(Tok::Edge(_))) {
                    let e = self.edge_name()?;
                    attrs.push((e, self.term("a value")?));
                }
                Ok(Action::Propose { state, operator: Symbol::named(&op), attrs })
            }
            Some(Tok::Ident(w)) if w == "prefer" => {
                self.pos += 1;
                let operator = self.node_term()?;
                let (word, span) = self.ident("a preference kind")?;
                let Some(kind) = PrefKind::from_word(&word) else {
                    self.diags.push(Diagnostic::error(span, format!("unknown preference kind `{word}`")));
                    return Err(());
                };
                let other = if kind.is_binary() { Some(self.node_term()?) } else { None };
                Ok(Action::Prefer { operator, kind, other })
            }
            _ => self.fail("expected an action or `}`"),
        }
    }

    fn production(&mut self, role: Role) -> P<ProductionDecl> {
        let span = self.span();
        self.pos += 1;
        let (name, _) = self.ident("a production name")?;
        let mut p = Production::new(&name, role, Vec::new(), Vec::new());
        if role == Role::Application {
            self.keyword("for")?;
            let (op, _) = self.ident("an operator name")?;
            p.operator = Some(Symbol::named(&op));
        }
        loop {
            if self.is_ident("utility") {
                self.pos += 1;
                p.utility = Some(self.number("a utility value")?);
            } else if self.is_ident("rl") {
                self.pos += 1;
                p.rl = true;
            } else if self.is_ident("origin") {
                self.pos += 1;
                let (o, span) = self.ident("`compiled` or `chunked`")?;
                p.origin = match o.as_str() {
                    "compiled" => Origin::Compiled,
                    "chunked" => Origin::Chunked,
                    _ => {
                        self.diags.push(Diagnostic::error(span, format!("unknown origin `{o}`")));
                        return Err(());
                    }
                };
            } else {
                break;
            }
        }
        self.expect(&Tok::LBrace)?;
        let mut condition_spans = Vec::new();
        while !self.eat(&Tok::Arrow) {
            condition_spans.push(self.span());
            p.conditions.push(self.condition()?);
        }
        let mut action_spans = Vec::new();
        while !self.eat(&Tok::RBrace) {
            action_spans.push(self.span());
            p.actions.push(self.action()?);
        }
        Ok(ProductionDecl { production: p, span, condition_spans, action_spans })
    }

    // ------------------------------------------------------------------
    // Model
    // ------------------------------------------------------------------

    fn header(&mut self, ast: &mut ModelAst) -> P<()> {
        self.keyword("cogm")?;
        let span = self.span();
        let v = self.number("a format version")?;
        if v != 1.0 {
            self.diags.push(Diagnostic::error(span, format!("unsupported format version {v}")));
        }
        self.mode(ast)
    }

    fn mode(&mut self, ast: &mut ModelAst) -> P<()> {
        self.keyword("mode")?;
        let (m, span) = self.ident("`actr` or `soar`")?;
        ast.mode = match m.as_str() {
            "actr" => Mode::Actr,
            "soar" => Mode::Soar,
            _ => {
                self.diags.push(Diagnostic::error(span, format!("unknown mode `{m}`; expected `actr` or `soar`")));
                return Err(());
            }
        };
        ast.mode_span = span;
        Ok(())
    }

    fn item(&mut self, ast: &mut ModelAst) -> P<()> {
        let (word, span) = match self.peek() {
            Some(Tok::Ident(w)) => (w.clone(), self.span()),
            _ => return self.fail("expected a block or production"),
        };
        if let Some(role) = role_of(&word) {
            let d = self.production(role)?;
            ast.productions.push(d);
            return Ok(());
        }
        match word.as_str() {
            "cogm" => {
                self.diags.push(Diagnostic::error(span, "duplicate `cogm` header"));
                Err(())
            }
            "mode" => {
                self.diags.push(Diagnostic::error(span, "mode declared twice"));
                Err(())
            }
            "buffers" => {
                self.pos += 1;
                self.expect(&Tok::LBrace)?;
                let list = ast.buffers.get_or_insert_with(Vec::new);
                while !matches!(self.peek(), Some(Tok::RBrace) | None) {
                    let span = self.span();
                    match self.peek() {
                        Some(Tok::Ident(b)) => {
                            list.push((Symbol::named(b), span));
                            self.pos += 1;
                        }
                        _ => return self.fail("expected a buffer name"),
                    }
                }
                self.expect(&Tok::RBrace)?;
                Ok(())
            }
            "params" => {
                self.pos += 1;
                self.expect(&Tok::LBrace)?;
                while !self.eat(&Tok::RBrace) {
                    let (name, span) = self.ident("a parameter name")?;
                    self.expect(&Tok::Eq)?;
                    let value = self.constant("a parameter value")?;
                    ast.params.push(Param { name: Symbol::named(&name), value, span });
                }
                Ok(())
            }
            "wm" => {
                self.pos += 1;
                let block = self.chunk_block()?;
                ast.wm.extend(block);
                Ok(())
            }
            "dm" => {
                self.pos += 1;
                let block = self.chunk_block()?;
                ast.dm.extend(block);
                Ok(())
            }
            "env" => {
                self.pos += 1;
                let span = self.span();
                match self.peek() {
                    Some(Tok::Str(s)) => {
                        ast.env = Some((s.clone(), span));
                        self.pos += 1;
                        Ok(())
                    }
                    _ => self.fail("expected a quoted file name"),
                }
            }
            _ => self.fail("expected a block or production"),
        }
    }
}

/// Source text for a token kept verbatim in a raw command argument list.
fn raw_text(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => s.clone(),
        Tok::Var(s) => format!("?{s}"),
        Tok::Node(s) => format!("@{s}"),
        Tok::Num(n) => crate::data::format_number(*n),
        Tok::Str(s) => Value::Str(s.clone()).to_string(),
        Tok::Edge(s) => format!("^{s}"),
        Tok::EdgeVar(s) => format!("^?{s}"),
        Tok::Bang(s) => format!("!{s}"),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::LBrace => "{".into(),
        Tok::RBrace => "}".into(),
        Tok::NegParen => "-(".into(),
        Tok::PlusParen => "+(".into(),
        Tok::Arrow => "-->".into(),
        Tok::Eq => "=".into(),
        Tok::Ne => "!=".into(),
        Tok::Lt => "<".into(),
        Tok::Gt => ">".into(),
        Tok::Le => "<=".into(),
        Tok::Ge => ">=".into(),
        Tok::Star => "*".into(),
        Tok::Stray(c) => c.to_string(),
        Tok::Unterminated => "\"".into(),
    }
}

/// Parses model source. A tree is always returned; it holds everything
/// that parsed cleanly, and the diagnostics say what did not.
pub fn parse(src: &str) -> (ModelAst, Vec<Diagnostic>) {
    let mut p = Parser::new(src);
    let mut ast = ModelAst::empty(Mode::Actr);
    if p.header(&mut ast).is_err() {
        p.sync(0);
    }
    while !p.at_end() {
        let start = p.pos;
        if p.item(&mut ast).is_err() {
            p.sync(start);
        }
    }
    let mut diags = p.diags;
    crate::dsl::diag::sort(&mut diags);
    diags.dedup();
    (ast, diags)
}

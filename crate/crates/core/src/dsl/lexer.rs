//! Tokenizer for model and environment-script source.

use std::fmt;

/// 1-based position of a token in the source. Spans never take part in
/// structural equality, so two syntax trees that differ only in layout
/// compare equal.
#[derive(Debug, Clone, Copy, Default, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Node(String),
    Num(f64),
    Str(String),
    /// `^edge`
    Edge(String),
    /// `^?var`
    EdgeVar(String),
    /// `!command`
    Bang(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    /// `-(`
    NegParen,
    /// `+(`
    PlusParen,
    Arrow,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Star,
    /// A character that starts no token.
    Stray(char),
    /// A string literal that reaches end of input.
    Unterminated,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`?{s}`"),
            Tok::Node(s) => write!(f, "`@{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Str(_) => f.write_str("string"),
            Tok::Edge(s) => write!(f, "`^{s}`"),
            Tok::EdgeVar(s) => write!(f, "`^?{s}`"),
            Tok::Bang(s) => write!(f, "`!{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::NegParen => f.write_str("`-(`"),
            Tok::PlusParen => f.write_str("`+(`"),
            Tok::Arrow => f.write_str("`-->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Stray(c) => write!(f, "unexpected character {c:?}"),
            Tok::Unterminated => f.write_str("unterminated string"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether `s` lexes back as a single identifier.
pub fn is_ident(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    match chars.first() {
        Some(&c) if ident_start(c) => {}
        _ => return false,
    }
    for (i, &c) in chars.iter().enumerate() {
        if ident_char(c) {
            continue;
        }
        if c == '-' && chars.get(i + 1).copied().is_some_and(ident_char) {
            continue;
        }
        return false;
    }
    true
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    rest: &'a str,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.rest.chars();
        it.next();
        it.next()
    }

    fn peek3(&self) -> Option<char> {
        self.rest.chars().nth(2)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if ident_char(c) || (c == '-' && self.peek2().is_some_and(ident_char)) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn take_number(&mut self) -> Option<f64> {
        let mut s = String::new();
        if matches!(self.peek(), Some('-' | '+')) {
            s.push(self.bump().unwrap());
        }
        while let Some(c) = self.peek() {
            let exp_sign = matches!(c, '-' | '+') && s.ends_with(['e', 'E']);
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s.parse().ok()
    }
}

/// Splits source into tokens. Never fails: characters that start no token
/// come back as [`Tok::Stray`] for the parser to report.
pub fn lex(src: &str) -> Vec<Token> {
    let mut cur = Cursor { chars: src.chars().peekable(), rest: src, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let span = Span { line: cur.line, col: cur.col };
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, span });
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' || (c == '/' && cur.peek2() == Some('/')) {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let digit_next = cur.peek2().is_some_and(|d| d.is_ascii_digit())
            || (cur.peek2() == Some('.') && cur.peek3().is_some_and(|d| d.is_ascii_digit()));
        match c {
            '(' => {
                cur.bump();
                push(&mut out, Tok::LParen);
            }
            ')' => {
                cur.bump();
                push(&mut out, Tok::RParen);
            }
            '{' => {
                cur.bump();
                push(&mut out, Tok::LBrace);
            }
            '}' => {
                cur.bump();
                push(&mut out, Tok::RBrace);
            }
            '*' => {
                cur.bump();
                push(&mut out, Tok::Star);
            }
            '=' => {
                cur.bump();
                push(&mut out, Tok::Eq);
            }
            '-' if cur.peek2() == Some('(') => {
                cur.bump();
                cur.bump();
                push(&mut out, Tok::NegParen);
            }
            '+' if cur.peek2() == Some('(') => {
                cur.bump();
                cur.bump();
                push(&mut out, Tok::PlusParen);
            }
            '-' if cur.peek2() == Some('-') && cur.peek3() == Some('>') => {
                cur.bump();
                cur.bump();
                cur.bump();
                push(&mut out, Tok::Arrow);
            }
            '<' | '>' => {
                cur.bump();
                let eq = cur.peek() == Some('=');
                if eq {
                    cur.bump();
                }
                let tok = match (c, eq) {
                    ('<', false) => Tok::Lt,
                    ('<', true) => Tok::Le,
                    ('>', false) => Tok::Gt,
                    _ => Tok::Ge,
                };
                push(&mut out, tok);
            }
            '!' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    push(&mut out, Tok::Ne);
                } else if cur.peek().is_some_and(ident_start) {
                    let name = cur.take_ident();
                    push(&mut out, Tok::Bang(name));
                } else {
                    push(&mut out, Tok::Stray('!'));
                }
            }
            '^' if cur.peek2() == Some('?') => {
                cur.bump();
                cur.bump();
                if cur.peek().is_some_and(ident_start) {
                    let name = cur.take_ident();
                    push(&mut out, Tok::EdgeVar(name));
                } else {
                    push(&mut out, Tok::Stray('^'));
                }
            }
            '?' | '@' | '^' => {
                cur.bump();
                if cur.peek().is_some_and(ident_start) {
                    let name = cur.take_ident();
                    let tok = match c {
                        '?' => Tok::Var(name),
                        '@' => Tok::Node(name),
                        _ => Tok::Edge(name),
                    };
                    push(&mut out, tok);
                } else {
                    push(&mut out, Tok::Stray(c));
                }
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                let mut closed = false;
                while let Some(ch) = cur.bump() {
                    match ch {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('r') => s.push('\r'),
                            Some(other) => s.push(other),
                            None => break,
                        },
                        other => s.push(other),
                    }
                }
                push(&mut out, if closed { Tok::Str(s) } else { Tok::Unterminated });
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+' || c == '.') && digit_next) || (c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) => {
                match cur.take_number() {
                    Some(n) => push(&mut out, Tok::Num(n)),
                    None => push(&mut out, Tok::Stray(c)),
                }
            }
            c if ident_start(c) => {
                let name = cur.take_ident();
                push(&mut out, Tok::Ident(name));
            }
            other => {
                cur.bump();
                push(&mut out, Tok::Stray(other));
            }
        }
    }
    out
}

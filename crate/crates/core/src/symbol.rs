//! Interned symbols and the fixed innate vocabulary.
//!
//! Symbols compare and order by their text. A [`SymbolTable`] hands out a
//! single shared allocation per distinct text, so equal text always yields
//! the same atom. Whether an atom is innate is a property of its text: the
//! innate vocabulary is closed and user code can reference those atoms but
//! never mint new ones.

use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::DataError;

/// Module status vocabulary.
pub const STATUS_WORDS: [&str; 4] = ["free", "busy", "success", "failure"];
/// The six buffer field names.
pub const FIELD_WORDS: [&str; 6] = ["percept", "command", "payload", "cue", "retrieved", "status"];
/// Impasse kinds.
pub const IMPASSE_WORDS: [&str; 4] = ["state-no-change", "tie", "conflict", "operator-no-change"];
/// Module commands a rule may issue.
pub const COMMAND_WORDS: [&str; 9] = [
    "retrieve",
    "retrieve-blend",
    "retrieve-name",
    "em-query",
    "em-next",
    "em-prev",
    "store",
    "motor",
    "halt",
];

/// Whether `text` belongs to the innate vocabulary.
pub fn is_innate(text: &str) -> bool {
    STATUS_WORDS.contains(&text)
        || FIELD_WORDS.contains(&text)
        || IMPASSE_WORDS.contains(&text)
        || COMMAND_WORDS.contains(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    User,
    Innate,
}

/// An interned atom.
#[derive(Clone)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn kind(&self) -> SymbolKind {
        if is_innate(&self.0) {
            SymbolKind::Innate
        } else {
            SymbolKind::User
        }
    }

    pub fn is_innate(&self) -> bool {
        self.kind() == SymbolKind::Innate
    }

    /// True when both atoms share one allocation (interned through the same table).
    pub fn same_atom(&self, other: &Symbol) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Builds a symbol without going through a table. Crate-internal so that
    /// only architecture code can produce innate atoms this way.
    pub(crate) fn raw(text: &str) -> Symbol {
        Symbol(Arc::from(text))
    }

    /// Convenience constructor for user atoms outside any table.
    pub fn user(text: &str) -> Result<Symbol, DataError> {
        check_user(text)?;
        Ok(Symbol::raw(text))
    }

    /// Reference an existing atom by text: innate words resolve to the innate
    /// atom, anything else to a user atom. Never fails on nonempty text.
    pub fn named(text: &str) -> Symbol {
        Symbol::raw(text)
    }
}

fn check_user(text: &str) -> Result<(), DataError> {
    if text.is_empty() {
        return Err(DataError::EmptySymbol);
    }
    if is_innate(text) {
        return Err(DataError::VocabularyCollision(text.to_string()));
    }
    Ok(())
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Symbol {}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}
impl std::hash::Hash for Symbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", &*self.0)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}
impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Symbol::named(&s))
    }
}

/// Per-agent interner.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    atoms: HashSet<Symbol>,
}

impl SymbolTable {
    /// A table with the innate vocabulary pre-interned.
    pub fn new() -> Self {
        let mut table = SymbolTable::default();
        for word in STATUS_WORDS
            .iter()
            .chain(FIELD_WORDS.iter())
            .chain(IMPASSE_WORDS.iter())
            .chain(COMMAND_WORDS.iter())
        {
            table.atoms.insert(Symbol::raw(word));
        }
        table
    }

    /// Intern `text` as an atom of the given kind.
    ///
    /// User atoms may not reuse innate text. Innate atoms can only be
    /// looked up, since the vocabulary was fixed when the table was built.
    pub fn intern(&mut self, text: &str, kind: SymbolKind) -> Result<Symbol, DataError> {
        match kind {
            SymbolKind::User => {
                check_user(text)?;
                Ok(self.get_or_insert(text))
            }
            SymbolKind::Innate => {
                if !is_innate(text) {
                    return Err(DataError::NotInnate(text.to_string()));
                }
                Ok(self.get_or_insert(text))
            }
        }
    }

    /// Reference by text; innate words give the innate atom.
    pub fn resolve(&mut self, text: &str) -> Symbol {
        self.get_or_insert(text)
    }

    pub fn lookup(&self, text: &str) -> Option<&Symbol> {
        self.atoms.get(text)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    fn get_or_insert(&mut self, text: &str) -> Symbol {
        if let Some(s) = self.atoms.get(text) {
            return s.clone();
        }
        let s = Symbol::raw(text);
        self.atoms.insert(s.clone());
        s
    }
}

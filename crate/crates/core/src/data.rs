//! The universal data model: values, elements, chunks, module status and
//! architecture-owned metadata records.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::symbol::Symbol;

/// Simulated time in milliseconds.
pub type Ms = u64;

/// The value slot of an element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Value {
    /// Reference to another node; the only kind of value that links graphs.
    Node(Symbol),
    Sym(Symbol),
    Num(f64),
    Str(String),
}

impl Value {
    fn rank(&self) -> u8 {
        match self {
            Value::Node(_) => 0,
            Value::Sym(_) => 1,
            Value::Num(_) => 2,
            Value::Str(_) => 3,
        }
    }

    pub fn as_node(&self) -> Option<&Symbol> {
        match self {
            Value::Node(s) => Some(s),
            _ => None,
        }
    }

    /// The symbol carried by a node or symbol value.
    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Value::Node(s) | Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn sym(text: &str) -> Value {
        Value::Sym(Symbol::named(text))
    }

    pub fn node(text: &str) -> Value {
        Value::Node(Symbol::named(text))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Node(a), Value::Node(b)) | (Value::Sym(a), Value::Sym(b)) => a.cmp(b),
            (Value::Num(a), Value::Num(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Node(s) | Value::Sym(s) => s.hash(state),
            Value::Num(n) => n.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

/// Writes `s` as a double-quoted literal with `\"`, `\\`, `\n`, `\t` escapes.
pub fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// Formats a number so that parsing the text gives back the same bits.
pub fn format_number(n: f64) -> String {
    let text = format!("{n}");
    if n.is_finite() {
        text
    } else {
        // not representable in the surface syntax; callers keep numbers finite
        format!("{n:?}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Node(s) => write!(f, "@{s}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Num(n) => f.write_str(&format_number(*n)),
            Value::Str(s) => write_quoted(f, s),
        }
    }
}

/// Content of an element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub node: Symbol,
    pub edge: Symbol,
    pub value: Value,
}

impl Triple {
    pub fn new(node: Symbol, edge: Symbol, value: Value) -> Self {
        Triple { node, edge, value }
    }

    /// Shorthand used heavily in tests: `Triple::of("g1", "color", Value::sym("red"))`.
    pub fn of(node: &str, edge: &str, value: Value) -> Self {
        Triple::new(Symbol::named(node), Symbol::named(edge), value)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} ^{} {})", self.node, self.edge, self.value)
    }
}

/// Run-unique element identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementId(pub u64);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An element instance: immutable content plus identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub triple: Triple,
}

impl Element {
    pub fn node(&self) -> &Symbol {
        &self.triple.node
    }
}

/// Elements sharing one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    name: Symbol,
    elements: Vec<Element>,
}

impl Chunk {
    /// Groups elements that all share a node into a chunk.
    pub fn assemble(elements: impl IntoIterator<Item = Element>) -> Result<Chunk, DataError> {
        let mut elements: Vec<Element> = elements.into_iter().collect();
        let name = match elements.first() {
            Some(e) => e.triple.node.clone(),
            None => return Err(DataError::EmptyChunk),
        };
        if let Some(other) = elements.iter().find(|e| e.triple.node != name) {
            return Err(DataError::HeterogeneousNodes(name, other.triple.node.clone()));
        }
        elements.sort_by(|a, b| a.triple.cmp(&b.triple).then(a.id.cmp(&b.id)));
        Ok(Chunk { name, elements })
    }

    pub fn name(&self) -> &Symbol {
        &self.name
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(edge, value)` pairs in sorted order.
    pub fn slots(&self) -> Vec<(Symbol, Value)> {
        self.elements
            .iter()
            .map(|e| (e.triple.edge.clone(), e.triple.value.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatusState {
    Free,
    Busy,
    Success,
    Failure,
}

impl StatusState {
    pub fn word(self) -> &'static str {
        match self {
            StatusState::Free => "free",
            StatusState::Busy => "busy",
            StatusState::Success => "success",
            StatusState::Failure => "failure",
        }
    }

    pub fn symbol(self) -> Symbol {
        Symbol::raw(self.word())
    }
}

/// Architecture-written status of one module buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleStatus {
    module: Symbol,
    state: StatusState,
    detail: Option<Symbol>,
}

impl ModuleStatus {
    pub(crate) fn new(module: Symbol, state: StatusState, detail: Option<Symbol>) -> Self {
        ModuleStatus { module, state, detail }
    }

    pub fn module(&self) -> &Symbol {
        &self.module
    }

    pub fn state(&self) -> StatusState {
        self.state
    }

    pub fn detail(&self) -> Option<&Symbol> {
        self.detail.as_ref()
    }
}

/// What a metadata record is attached to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetaSubject {
    Element(ElementId),
    Chunk(Symbol),
    Production(Symbol),
}

/// Identity of a fired rule instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstId(pub u64);

impl fmt::Display for InstId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

/// How an element came to exist; the derivation metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivation {
    Instantiation(InstId),
    Retrieval {
        cue: Vec<ElementId>,
        request: Option<InstId>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetaPayload {
    ActivationTrace(Vec<Ms>),
    CopyOf(Symbol),
    Derivation(Derivation),
    SubstateLevel(Symbol),
    Utility(f64),
    Association { source: Symbol, target: Symbol, strength: f64 },
}

/// A piece of architecture-owned metadata as exposed to inspection tools.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaRecord {
    pub subject: MetaSubject,
    pub payload: MetaPayload,
    /// Simulated time of the last mutation.
    pub at: Ms,
}

/// Shortest directed path length from `root` to `target` through node-valued
/// elements, or `None` when unreachable. A node reaches itself at depth 0.
pub fn linked<'a>(
    graph: impl IntoIterator<Item = &'a Triple>,
    root: &Symbol,
    target: &Symbol,
) -> Option<usize> {
    if root == target {
        return Some(0);
    }
    let mut adj: HashMap<&Symbol, Vec<&Symbol>> = HashMap::new();
    for t in graph {
        if let Value::Node(v) = &t.value {
            adj.entry(&t.node).or_default().push(v);
        }
    }
    let mut seen: HashMap<&Symbol, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(root, 0);
    queue.push_back(root);
    while let Some(n) = queue.pop_front() {
        let d = seen[n];
        if let Some(next) = adj.get(n) {
            for &m in next {
                if seen.contains_key(m) {
                    continue;
                }
                if m == target {
                    return Some(d + 1);
                }
                seen.insert(m, d + 1);
                queue.push_back(m);
            }
        }
    }
    None
}

/// For every node reachable from some root, the index of the first root (in
/// order) that reaches it. Roots earlier in the slice win, so with states
/// listed top first this is the shallowest linking state.
pub fn node_levels<'a>(
    graph: impl IntoIterator<Item = &'a Triple>,
    roots: &[Symbol],
) -> BTreeMap<Symbol, usize> {
    let mut adj: HashMap<&Symbol, Vec<&Symbol>> = HashMap::new();
    for t in graph {
        if let Value::Node(v) = &t.value {
            adj.entry(&t.node).or_default().push(v);
        }
    }
    let mut level: BTreeMap<Symbol, usize> = BTreeMap::new();
    for (i, root) in roots.iter().enumerate() {
        if level.contains_key(root) {
            continue;
        }
        level.insert(root.clone(), i);
        let mut queue = VecDeque::from([root]);
        while let Some(n) = queue.pop_front() {
            if let Some(next) = adj.get(n) {
                for &m in next {
                    if !level.contains_key(m) {
                        level.insert(m.clone(), i);
                        queue.push_back(m);
                    }
                }
            }
        }
    }
    level
}

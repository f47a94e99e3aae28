//! Syntax tree of a model file.

use crate::data::Value;
use crate::dsl::lexer::Span;
use crate::procedural::Production;
use crate::symbol::Symbol;
use crate::wm::Mode;

/// `(node ^edge value ...)` in a `wm`, `dm` or percept block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkDecl {
    pub node: Symbol,
    pub slots: Vec<(Symbol, Value)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Symbol,
    pub value: Value,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionDecl {
    pub production: Production,
    pub span: Span,
    /// One span per condition, then one per action.
    pub condition_spans: Vec<Span>,
    pub action_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelAst {
    pub mode: Mode,
    pub mode_span: Span,
    /// `None` when the model declares no `buffers` block.
    pub buffers: Option<Vec<(Symbol, Span)>>,
    pub params: Vec<Param>,
    pub wm: Vec<ChunkDecl>,
    pub dm: Vec<ChunkDecl>,
    pub env: Option<(String, Span)>,
    pub productions: Vec<ProductionDecl>,
}

impl ModelAst {
    pub fn empty(mode: Mode) -> ModelAst {
        ModelAst {
            mode,
            mode_span: Span::default(),
            buffers: None,
            params: Vec::new(),
            wm: Vec::new(),
            dm: Vec::new(),
            env: None,
            productions: Vec::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<&Value> {
        self.params.iter().rev().find(|p| p.name.as_str() == name).map(|p| &p.value)
    }

    pub fn production(&self, name: &str) -> Option<&Production> {
        self.productions.iter().map(|d| &d.production).find(|p| p.name.as_str() == name)
    }
}

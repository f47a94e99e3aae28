//! The model language: lexing, parsing with recovery, validation, the
//! canonical printer, and environment scripts.

pub mod ast;
pub mod diag;
pub mod env;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod validate;

pub use ast::{ChunkDecl, ModelAst, Param, ProductionDecl};
pub use diag::{has_errors, Diagnostic, Severity};
pub use env::{parse_env, EnvScript, MotorResponse, ScriptedPercept, ScriptedReward};
pub use lexer::Span;
pub use parser::parse;
pub use print::model as print_model;
pub use validate::{default_buffers, validate, Model};

/// The closest candidate to a misspelled word, if any is close enough.
pub fn suggest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(word, c), c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3) && *d > 0)
        .min()
        .map(|(_, c)| c)
}

/// Parses and validates. Diagnostics from both stages come back together;
/// a model is returned only when none of them is an error.
pub fn load(src: &str) -> (Option<Model>, Vec<Diagnostic>) {
    let (ast, mut diags) = parse(src);
    if has_errors(&diags) {
        return (None, diags);
    }
    let (model, vdiags) = validate(&ast);
    diags.extend(vdiags);
    (model, diags)
}

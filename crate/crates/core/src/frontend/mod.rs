//! Lexing and parsing of the supported Java subset.
//!
//! Every AST node carries an inclusive character span into the original text.
//! Methods that use constructs outside the subset (lambdas, anonymous classes,
//! `synchronized` blocks, ...) are kept in the tree with an empty body and an
//! [`UnsupportedConstruct`] marker so the rest of the file still parses.

pub mod ast;
pub mod lexer;
mod parser;
pub mod source;

pub use ast::*;
pub use parser::{parse, parse_expression, parse_statement};
pub use source::{SourceFile, Span};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported construct: {} at {:?}", .0.what, .0.span)]
    Unsupported(UnsupportedConstruct),
}

/// All methods and constructors of the unit, in source order.
pub fn list_methods(unit: &CompilationUnit) -> Vec<&MethodDecl> {
    let mut methods: Vec<&MethodDecl> = unit.classes.iter().flat_map(|c| c.methods.iter()).collect();
    methods.sort_by_key(|m| m.span.start);
    methods
}

// SPDX-License-Identifier: Apache-2.0

//! The teaching language: syntax, parser, pretty-printer and interpreter.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod ted;
pub mod types;

pub use ast::{Ast, Expr, Label, Stmt, StmtId, StmtKind};
pub use interp::{interpret, IoTrace, Literal, Outcome, RuntimeError, Status, Value};
pub use parser::{parse, parse_expr};
pub use pretty::render;
pub use ted::{ast_size, tree_edit_distance};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: u32, col: u32, expected: Vec<String>, found: String },
    #[error("{line}:{col}: unsupported feature: {feature}")]
    Unsupported { line: u32, col: u32, feature: String },
    #[error("{line}:{col}: {message}")]
    Semantic { line: u32, col: u32, message: String },
}

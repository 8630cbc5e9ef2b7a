//! Grammar-of-graphics scripts: lexing, parsing, and compilation into a
//! [`SceneGraph`].
//!
//! ```text
//! statement := ("ELEMENT" | "GUIDE") ":" call
//! call      := ident ("." ident)* "(" [expr ("," expr)*] ")"
//! expr      := operand ["*" operand] | string | number | "(" number "," number ")"
//! operand   := call | ident
//! ```
//!
//! Bare identifiers resolve to data columns at compile time, except for the
//! builtins `zero`, `dim` and `hue`. `DATA`, `SCALE` and `COORD` are reserved.

pub mod ast;
pub mod compile;
pub mod contour;
pub mod kde;
pub mod lexer;
pub mod parser;
pub mod scene;

use std::fmt;

use thiserror::Error;

pub use ast::{pretty_print, CallExpr, Expr, GogStatement, StatementKind};
pub use compile::compile;
pub use contour::{extract_contours, ContourLevel};
pub use kde::{epanechnikov_kde_2d, DensityGrid, KdeSpec};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use scene::*;

/// Death rate against birth rate with a joint density overlay.
pub const EXAMPLE_SCRIPT: &str = r#"ELEMENT: point(position(birth*death), size(zero), label(country))
ELEMENT: contour(position(smooth.density.kernel.epanechnikov.joint(birth*death)), color.hue())
GUIDE  : form.line(position((0,0),(30,30)), label("Zero Population Growth"))
GUIDE  : axis(dim(1), label("Birth Rate"))
GUIDE  : axis(dim(2), label("Death Rate"))
"#;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

fn at(pos: &Option<Pos>) -> String {
    match pos {
        Some(p) => p.to_string(),
        None => "end of input".into(),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GogError {
    #[error("{pos}: {message}")]
    Lex { pos: Pos, message: String },
    #[error("{}: syntax error, expected one of [{}], found {found}", at(.pos), .expected.join(", "))]
    Syntax {
        pos: Option<Pos>,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: statement keyword {keyword} is reserved")]
    Reserved { pos: Pos, keyword: String },
    #[error("{pos}: unknown statement keyword {word}")]
    UnknownStatement { pos: Pos, word: String },
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("unknown geometry, guide or function {0}")]
    UnknownPath(String),
    #[error("type error on column {column}: {message}")]
    Type { column: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("density: {0}")]
    Kde(String),
}

/// Parses and compiles in one step.
pub fn compile_script(source: &str, data: &crate::data::DataSource) -> Result<SceneGraph, GogError> {
    compile(&parse(source)?, data)
}

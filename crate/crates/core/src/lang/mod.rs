//! The modeling language: tokens, syntax tree, parser, and load checks.
//!
//! A model is a list of classes:
//!
//! ```text
//! class pendulum (l)
//! private
//!   theta := 0; theta' := 0; theta'' := 0;
//!   g := 9.81;
//! end
//!   theta'' = g/l*cos(theta);
//! end
//! ```
//!
//! `=` is a continuous assignment (holds at every instant), `:=` a discrete
//! one (fires once when executed). Trailing `'` marks select time derivatives.

mod ast;
mod load;
mod parser;
mod pretty;
mod token;

use thiserror::Error;

pub use ast::*;
pub use token::{tokenize, Pos, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LangError {
    #[error("{pos}: lexical error: {message}")]
    Lex { pos: Pos, message: String },
    #[error("{pos}: parse error: expected {expected}, found {found}")]
    Parse { pos: Pos, expected: String, found: String },
    #[error("load error: {}", .0.join("; "))]
    Load(Vec<String>),
}

impl LangError {
    /// Source position, when the error has one.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            LangError::Lex { pos, .. } | LangError::Parse { pos, .. } => Some(*pos),
            LangError::Load(_) => None,
        }
    }
}

/// Parses and load-checks a complete model source.
pub fn parse_model(source: &str) -> Result<Model, LangError> {
    let mut p = parser::Parser::new(source)?;
    let model = p.parse_model()?;
    let problems = load::check_model(&model);
    if problems.is_empty() {
        Ok(model)
    } else {
        Err(LangError::Load(problems))
    }
}

/// Parses a single expression, e.g. a constructor argument given on a command line.
pub fn parse_expression(source: &str) -> Result<Expr, LangError> {
    let mut p = parser::Parser::new(source)?;
    let e = p.parse_expr()?;
    if !p.at_end() {
        return Err(p.error("end of expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests;

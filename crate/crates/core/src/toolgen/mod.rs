//! Tools generated from a [`LanguageDescription`]: scanner, parser,
//! prettyprinter, typechecker and interpreter.

mod eval;
mod format;
mod generate;
mod lexer;
mod parser;
mod render;
mod typecheck;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, EvalError, Store, Value, DEFAULT_FUEL};
pub use format::{format_term, instantiate, FormatError};
pub use generate::generate;
pub use lexer::{tokenize, LexError, Lexer, Token, TokenKind};
pub use parser::{parse_program, parse_tokens, ParseError, Parser};
pub use render::render;
pub use typecheck::{typecheck, TypeError, TypecheckError};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Inclusive start, exclusive end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Abstract syntax tree node. Leaves for `ident`/`number`/`string`
/// tokens are labeled with the class name and carry the spelling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Term {
    pub fn node(label: impl Into<String>, children: Vec<Term>) -> Self {
        Term { label: label.into(), children, payload: None, span: None }
    }

    pub fn leaf(class: impl Into<String>, spelling: impl Into<String>) -> Self {
        Term { label: class.into(), children: Vec::new(), payload: Some(spelling.into()), span: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.payload.is_some()
    }

    /// The same tree with every span removed.
    pub fn without_spans(&self) -> Term {
        Term {
            label: self.label.clone(),
            children: self.children.iter().map(Term::without_spans).collect(),
            payload: self.payload.clone(),
            span: None,
        }
    }

    pub fn eq_modulo_spans(&self, other: &Term) -> bool {
        self.label == other.label
            && self.payload == other.payload
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.eq_modulo_spans(b))
    }

    /// Number of production nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(Term::depth).max().unwrap_or(0)
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.payload {
            return write!(f, "{} {:?}", self.label, p);
        }
        f.write_str(&self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

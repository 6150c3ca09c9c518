//! The textual facet sublanguages and the compiler from a finalized design
//! to a [`LanguageDescription`].

pub mod boxes;
pub mod description;
pub mod eval;
pub mod grammar;
mod scan;
pub mod template;
pub mod typing;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use boxes::{parse_box_expr, parse_box_text, BoxExpr, BoxRule};
pub use description::{compile_design, validate_description, CompileError, LanguageDescription};
pub use eval::{parse_eval_text, BuiltinOp, Conclusion, EvalRule, EvalTarget, Premise};
pub use grammar::{parse_grammar_text, Grammar, LexClass, Production, Symbol, TokenClass, TokenKind};
pub use typing::{parse_typing_text, GroundType, Judgment, TypeTerm, TypingRule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, expected: &[&str], found: String) -> Self {
        ParseError { line, column, expected: expected.iter().map(|s| s.to_string()).collect(), found }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected {}, found {}", self.line, self.column, self.expected.join(" or "), self.found)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FacetKind {
    Grammar,
    Box,
    Typing,
    Eval,
}

impl FacetKind {
    pub const ALL: [FacetKind; 4] = [FacetKind::Grammar, FacetKind::Box, FacetKind::Typing, FacetKind::Eval];

    pub fn name(self) -> &'static str {
        match self {
            FacetKind::Grammar => "grammar",
            FacetKind::Box => "box",
            FacetKind::Typing => "typing",
            FacetKind::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FacetValue {
    Grammar(Vec<Production>),
    Box(Vec<BoxRule>),
    Typing(Vec<TypingRule>),
    Eval(Vec<EvalRule>),
}

impl FacetValue {
    pub fn kind(&self) -> FacetKind {
        match self {
            FacetValue::Grammar(_) => FacetKind::Grammar,
            FacetValue::Box(_) => FacetKind::Box,
            FacetValue::Typing(_) => FacetKind::Typing,
            FacetValue::Eval(_) => FacetKind::Eval,
        }
    }
}

/// Canonical printer: one item per line, each terminated by a newline.
impl fmt::Display for FacetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn lines<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
            items.iter().try_for_each(|i| writeln!(f, "{i}"))
        }
        match self {
            FacetValue::Grammar(v) => lines(f, v),
            FacetValue::Box(v) => lines(f, v),
            FacetValue::Typing(v) => lines(f, v),
            FacetValue::Eval(v) => lines(f, v),
        }
    }
}

pub fn parse_facet(kind: FacetKind, text: &str) -> Result<FacetValue, ParseError> {
    Ok(match kind {
        FacetKind::Grammar => FacetValue::Grammar(parse_grammar_text(text)?),
        FacetKind::Box => FacetValue::Box(parse_box_text(text)?),
        FacetKind::Typing => FacetValue::Typing(parse_typing_text(text)?),
        FacetKind::Eval => FacetValue::Eval(parse_eval_text(text)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_facet_dispatches_and_prints_back() {
        let text = "Assign: Stmt -> ident \":=\" Expr \";\"\nPrint: Stmt -> \"print\" Expr \";\"\n";
        let v = parse_facet(FacetKind::Grammar, text).unwrap();
        assert_eq!(v.kind(), FacetKind::Grammar);
        assert_eq!(v.to_string(), text);
    }

    #[test]
    fn error_carries_position_and_expected_set() {
        let err = parse_facet(FacetKind::Box, "\n\nPrint = Q").unwrap_err();
        assert_eq!((err.line, err.column), (3, 9));
        assert!(err.expected.contains(&"`H`".to_string()));
        assert!(err.to_string().starts_with("3:9: expected"));
    }
}

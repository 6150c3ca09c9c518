//! Prettyprinting by example: read the layout of formatted example
//! programs and infer the simplest Box rules that reproduce them.

mod infer;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::metalang::{BoxExpr, Grammar, LanguageDescription, Symbol};
use crate::toolgen::{ParseError, Parser, Span, Term, Token};

pub use infer::{conflicts, cost, infer_rules, ConflictDimension, InferenceConflict, Witness};

/// Where a production instance came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceId {
    pub example: String,
    pub span: Span,
}

/// Geometry of one rhs component, relative to the node's first token.
/// Lines count from 0; columns are offsets from the node's start column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ComponentGeometry {
    pub position: usize,
    /// Spelling of a literal component; `None` for children.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal: Option<String>,
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutObservation {
    pub label: String,
    pub instance: InstanceId,
    pub components: Vec<ComponentGeometry>,
}

impl LayoutObservation {
    /// Column gap between neighbouring components that share a line.
    pub fn gaps(&self) -> Vec<Option<u32>> {
        self.components
            .windows(2)
            .map(|w| (w[0].end_line == w[1].line).then(|| w[1].column - w[0].end_column))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum PpbeError {
    #[error("example `{name}` does not parse: {cause}")]
    ExampleParseError { name: String, line: u32, column: u32, cause: ParseError },
    #[error("example `{name}` is ambiguous")]
    AmbiguousExample { name: String },
    #[error("example `{name}`: `{label}` at {line}:{column} starts left of its node, which no Box layout can produce")]
    UnalignedComponent { name: String, label: String, line: u32, column: u32 },
}

/// One observation per production node of every example.
pub fn collect_layouts(grammar: &Grammar, examples: &[(String, String)]) -> Result<Vec<LayoutObservation>, PpbeError> {
    let parser = Parser::new(grammar);
    let mut out = Vec::new();
    for (name, text) in examples {
        let fail = |error: ParseError| {
            let (line, column) = match &error {
                ParseError::Lex(e) => (e.line, e.column),
                ParseError::Syntax { line, column, .. } => (*line, *column),
                ParseError::Ambiguous { .. } => (0, 0),
            };
            if matches!(error, ParseError::Ambiguous { .. }) {
                PpbeError::AmbiguousExample { name: name.clone() }
            } else {
                PpbeError::ExampleParseError { name: name.clone(), line, column, cause: error }
            }
        };
        let tokens = parser.lexer().tokenize(text).map_err(|e| fail(e.into()))?;
        let term = parser.parse_tokens(&tokens).map_err(fail)?;
        observe(grammar, name, &term, &tokens, &mut out)?;
    }
    Ok(out)
}

fn observe(
    grammar: &Grammar,
    name: &str,
    t: &Term,
    tokens: &[Token],
    out: &mut Vec<LayoutObservation>,
) -> Result<(), PpbeError> {
    if t.is_leaf() {
        return Ok(());
    }
    let span = t.span.expect("parsed terms carry spans");
    let prod = grammar.production_by_label(&t.label).expect("label comes from the grammar");
    let origin = span.start;
    let mut k = tokens.partition_point(|tok| tok.span.start < origin);
    let mut kids = t.children.iter();
    let mut components = Vec::new();
    for (position, sym) in prod.rhs.iter().enumerate() {
        let literal = match sym {
            Symbol::Literal(l) => Some(l.clone()),
            _ => None,
        };
        let s = match sym {
            Symbol::Literal(_) => {
                let s = tokens[k].span;
                k += 1;
                s
            }
            _ => {
                let child = kids.next().expect("arity matches");
                let s = child.span.expect("parsed terms carry spans");
                while k < tokens.len() && tokens[k].span.start < s.end {
                    k += 1;
                }
                s
            }
        };
        let rel = |line: u32, column: u32| -> Result<(u32, u32), PpbeError> {
            if column < origin.column {
                return Err(PpbeError::UnalignedComponent {
                    name: name.to_string(),
                    label: t.label.clone(),
                    line,
                    column,
                });
            }
            Ok((line - origin.line, column - origin.column))
        };
        let (line, column) = rel(s.start.line, s.start.column)?;
        let (end_line, end_column) = rel(s.end.line, s.end.column)?;
        components.push(ComponentGeometry { position, literal, line, column, end_line, end_column });
    }
    out.push(LayoutObservation {
        label: t.label.clone(),
        instance: InstanceId { example: name.to_string(), span },
        components,
    });
    for c in &t.children {
        observe(grammar, name, c, tokens, out)?;
    }
    Ok(())
}

/// Labels of the grammar with and without example instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub covered: Vec<String>,
    pub missing: Vec<String>,
}

pub fn coverage(grammar: &Grammar, observations: &[LayoutObservation]) -> CoverageReport {
    let seen: BTreeSet<&str> = observations.iter().map(|o| o.label.as_str()).collect();
    let (covered, missing): (Vec<&str>, Vec<&str>) = grammar.labels().into_iter().partition(|l| seen.contains(l));
    CoverageReport {
        covered: covered.into_iter().map(String::from).collect(),
        missing: missing.into_iter().map(String::from).collect(),
    }
}

/// Adds inferred rules for labels the description has no rule for.
/// Hand-written rules always win. Provenance of an added rule is the
/// concept that contributed the production.
pub fn overlay(desc: &LanguageDescription, inferred: &BTreeMap<String, BoxExpr>) -> LanguageDescription {
    let mut out = desc.clone();
    for (label, rule) in inferred {
        let Some(p) = desc.production(label) else { continue };
        if out.formatting.contains_key(label) {
            continue;
        }
        out.formatting.insert(label.clone(), rule.clone());
        if let Some(c) = desc.provenance.get(&format!("production:{}/{}", p.lhs, p.label)) {
            out.provenance.insert(format!("formatting:{label}"), c.clone());
        }
    }
    out
}

/// Formatting facet text for a rule set, one `Label = box` per line.
pub fn rules_text(rules: &BTreeMap<String, BoxExpr>) -> String {
    rules.iter().map(|(l, b)| format!("{l} = {b}\n")).collect()
}

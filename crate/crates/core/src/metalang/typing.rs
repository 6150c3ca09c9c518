//! Typing-rule sublanguage: one syntax-directed inference rule per line.
//!
//! ```text
//! rule     ::= Label ":" [premise ("," premise)*] "=>" type
//! premise  ::= "|-" $N ":" type        # the child has this type
//!            | "lookup" $N ":" type    # identifier child, type from the environment
//!            | "bind" $N ":" type      # identifier child, declared with this type
//!            | type "=" type
//! type     ::= int | bool | string | unit | TypeVar
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::scan::{is_upper_name, parse_lines, Cursor, Tok};
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundType {
    Int,
    Bool,
    String,
    Unit,
}

impl GroundType {
    pub fn name(self) -> &'static str {
        match self {
            GroundType::Int => "int",
            GroundType::Bool => "bool",
            GroundType::String => "string",
            GroundType::Unit => "unit",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "int" => Some(GroundType::Int),
            "bool" => Some(GroundType::Bool),
            "string" => Some(GroundType::String),
            "unit" => Some(GroundType::Unit),
            _ => None,
        }
    }
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeTerm {
    Ground(GroundType),
    Var(String),
}

impl fmt::Display for TypeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTerm::Ground(g) => write!(f, "{g}"),
            TypeTerm::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Judgment {
    TypeOf { child: usize, ty: TypeTerm },
    Lookup { child: usize, ty: TypeTerm },
    Bind { child: usize, ty: TypeTerm },
    Eq { left: TypeTerm, right: TypeTerm },
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Judgment::TypeOf { child, ty } => write!(f, "|- ${child} : {ty}"),
            Judgment::Lookup { child, ty } => write!(f, "lookup ${child} : {ty}"),
            Judgment::Bind { child, ty } => write!(f, "bind ${child} : {ty}"),
            Judgment::Eq { left, right } => write!(f, "{left} = {right}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypingRule {
    pub label: String,
    pub premises: Vec<Judgment>,
    pub conclusion: TypeTerm,
}

impl TypingRule {
    /// Type variables that the conclusion uses but no premise binds.
    pub fn unbound_conclusion_vars(&self) -> Vec<String> {
        let mut bound = BTreeSet::new();
        for p in &self.premises {
            match p {
                Judgment::TypeOf { ty: TypeTerm::Var(v), .. }
                | Judgment::Lookup { ty: TypeTerm::Var(v), .. }
                | Judgment::Bind { ty: TypeTerm::Var(v), .. } => {
                    bound.insert(v.clone());
                }
                Judgment::Eq { left, right } => {
                    for t in [left, right] {
                        if let TypeTerm::Var(v) = t {
                            bound.insert(v.clone());
                        }
                    }
                }
                _ => {}
            }
        }
        match &self.conclusion {
            TypeTerm::Var(v) if !bound.contains(v) => vec![v.clone()],
            _ => Vec::new(),
        }
    }

    pub fn child_refs(&self) -> Vec<usize> {
        self.premises
            .iter()
            .filter_map(|p| match p {
                Judgment::TypeOf { child, .. } | Judgment::Lookup { child, .. } | Judgment::Bind { child, .. } => {
                    Some(*child)
                }
                Judgment::Eq { .. } => None,
            })
            .collect()
    }
}

impl fmt::Display for TypingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, " {p}")?;
        }
        write!(f, " => {}", self.conclusion)
    }
}

fn parse_type(cur: &mut Cursor) -> Result<TypeTerm, ParseError> {
    match cur.peek().clone() {
        Tok::Word(w) => {
            if let Some(g) = GroundType::from_name(&w) {
                cur.bump();
                Ok(TypeTerm::Ground(g))
            } else if is_upper_name(&w) {
                cur.bump();
                Ok(TypeTerm::Var(w))
            } else {
                Err(cur.error(&["`int`", "`bool`", "`string`", "`unit`", "type variable"]))
            }
        }
        _ => Err(cur.error(&["`int`", "`bool`", "`string`", "`unit`", "type variable"])),
    }
}

fn parse_judgment(cur: &mut Cursor) -> Result<Judgment, ParseError> {
    if cur.eat_punct("|-") {
        let child = cur.expect_child()?;
        cur.expect_punct(":")?;
        return Ok(Judgment::TypeOf { child, ty: parse_type(cur)? });
    }
    for (kw, is_lookup) in [("lookup", true), ("bind", false)] {
        if cur.eat_word(kw) {
            let child = cur.expect_child()?;
            cur.expect_punct(":")?;
            let ty = parse_type(cur)?;
            return Ok(if is_lookup { Judgment::Lookup { child, ty } } else { Judgment::Bind { child, ty } });
        }
    }
    if matches!(cur.peek(), Tok::Word(_)) {
        let left = parse_type(cur)?;
        cur.expect_punct("=")?;
        let right = parse_type(cur)?;
        return Ok(Judgment::Eq { left, right });
    }
    Err(cur.error(&["`|-`", "`lookup`", "`bind`", "type", "`=>`"]))
}

pub(crate) fn parse_typing_rule(cur: &mut Cursor) -> Result<TypingRule, ParseError> {
    let label = cur.expect_label()?;
    cur.expect_punct(":")?;
    let mut premises = Vec::new();
    if !cur.eat_punct("=>") {
        loop {
            premises.push(parse_judgment(cur)?);
            if cur.eat_punct(",") {
                continue;
            }
            if cur.eat_punct("=>") {
                break;
            }
            return Err(cur.error(&["`,`", "`=>`"]));
        }
    }
    let conclusion = parse_type(cur)?;
    Ok(TypingRule { label, premises, conclusion })
}

pub fn parse_typing_text(text: &str) -> Result<Vec<TypingRule>, ParseError> {
    parse_lines(text, parse_typing_rule)
}

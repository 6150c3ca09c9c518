//! Grammar sublanguage: `Label: Lhs -> sym sym ...`.
//!
//! A symbol is a quoted literal (`":="`), a lexical class (`ident`,
//! `number`, `string`) or a capitalized nonterminal. An empty right-hand
//! side denotes an empty production.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::scan::{is_lower_name, is_upper_name, parse_lines, quote, Cursor, Tok};
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LexClass {
    Ident,
    Number,
    String,
}

impl LexClass {
    pub fn name(self) -> &'static str {
        match self {
            LexClass::Ident => "ident",
            LexClass::Number => "number",
            LexClass::String => "string",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ident" => Some(LexClass::Ident),
            "number" => Some(LexClass::Number),
            "string" => Some(LexClass::String),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symbol {
    Literal(String),
    Class(LexClass),
    Nonterminal(String),
}

impl Symbol {
    pub fn is_literal(&self) -> bool {
        matches!(self, Symbol::Literal(_))
    }

    pub fn as_nonterminal(&self) -> Option<&str> {
        match self {
            Symbol::Nonterminal(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Literal(s) => f.write_str(&quote(s)),
            Symbol::Class(c) => f.write_str(c.name()),
            Symbol::Nonterminal(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Production {
    pub lhs: String,
    pub label: String,
    pub rhs: Vec<Symbol>,
}

impl Production {
    /// Rhs positions that become children of the term (everything but literals).
    pub fn child_positions(&self) -> Vec<usize> {
        self.rhs.iter().enumerate().filter(|(_, s)| !s.is_literal()).map(|(i, _)| i).collect()
    }

    pub fn child_index_of(&self, position: usize) -> Option<usize> {
        if self.rhs.get(position)?.is_literal() {
            return None;
        }
        Some(self.rhs[..position].iter().filter(|s| !s.is_literal()).count())
    }

    pub fn arity(&self) -> usize {
        self.rhs.iter().filter(|s| !s.is_literal()).count()
    }

    /// The shape shared by all productions carrying the same label:
    /// literals and lexical classes exactly, nonterminals as placeholders.
    pub fn shape(&self) -> Vec<Option<Symbol>> {
        self.rhs
            .iter()
            .map(|s| match s {
                Symbol::Nonterminal(_) => None,
                other => Some(other.clone()),
            })
            .collect()
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ->", self.label, self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Symbol,
    Identifier,
    Number,
    String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenClass {
    pub name: String,
    pub kind: TokenKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spelling: Option<String>,
}

impl TokenClass {
    pub fn for_literal(spelling: &str) -> Self {
        let word = spelling.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && spelling.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        TokenClass {
            name: spelling.to_string(),
            kind: if word { TokenKind::Keyword } else { TokenKind::Symbol },
            spelling: Some(spelling.to_string()),
        }
    }

    pub fn for_class(class: LexClass) -> Self {
        let kind = match class {
            LexClass::Ident => TokenKind::Identifier,
            LexClass::Number => TokenKind::Number,
            LexClass::String => TokenKind::String,
        };
        TokenClass { name: class.name().to_string(), kind, spelling: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar {
    pub tokens: Vec<TokenClass>,
    pub nonterminals: BTreeSet<String>,
    pub start: String,
    pub productions: Vec<Production>,
}

impl Grammar {
    /// Builds a grammar, deriving token classes from the symbols in use.
    pub fn new(start: impl Into<String>, productions: Vec<Production>) -> Self {
        let mut tokens = BTreeSet::new();
        let mut nonterminals = BTreeSet::new();
        for p in &productions {
            nonterminals.insert(p.lhs.clone());
            for s in &p.rhs {
                match s {
                    Symbol::Literal(l) => {
                        tokens.insert(TokenClass::for_literal(l));
                    }
                    Symbol::Class(c) => {
                        tokens.insert(TokenClass::for_class(*c));
                    }
                    Symbol::Nonterminal(n) => {
                        nonterminals.insert(n.clone());
                    }
                }
            }
        }
        let start = start.into();
        nonterminals.insert(start.clone());
        Grammar { tokens: tokens.into_iter().collect(), nonterminals, start, productions }
    }

    pub fn productions_of<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = (usize, &'a Production)> + 'a {
        self.productions.iter().enumerate().filter(move |(_, p)| p.lhs == lhs)
    }

    /// First production carrying `label`; all productions with one label share a shape.
    pub fn production_by_label(&self, label: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.label == label)
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.productions.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn uses_class(&self, class: LexClass) -> bool {
        self.productions.iter().any(|p| p.rhs.contains(&Symbol::Class(class)))
    }

    /// Labels of productions reachable from the start symbol.
    pub fn reachable_labels(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.start.clone()];
        let mut labels = BTreeSet::new();
        while let Some(nt) = stack.pop() {
            if !seen.insert(nt.clone()) {
                continue;
            }
            for (_, p) in self.productions_of(&nt) {
                labels.insert(p.label.clone());
                for s in &p.rhs {
                    if let Symbol::Nonterminal(n) = s {
                        stack.push(n.clone());
                    }
                }
            }
        }
        labels
    }

    /// Structural problems: undeclared symbols, duplicate labels per lhs,
    /// label shapes that disagree across lhs, missing start productions.
    pub fn check(&self) -> Vec<(String, String)> {
        let mut issues = Vec::new();
        if !self.nonterminals.contains(&self.start) {
            issues.push((self.start.clone(), "undeclared-start".to_string()));
        }
        if self.productions_of(&self.start).next().is_none() {
            issues.push((self.start.clone(), "start-has-no-productions".to_string()));
        }
        let mut per_lhs: BTreeSet<(&str, &str)> = BTreeSet::new();
        let mut shapes: BTreeMap<&str, Vec<Option<Symbol>>> = BTreeMap::new();
        for p in &self.productions {
            if !per_lhs.insert((&p.lhs, &p.label)) {
                issues.push((p.label.clone(), format!("duplicate-label-for-{}", p.lhs)));
            }
            let shape = p.shape();
            match shapes.get(p.label.as_str()) {
                Some(existing) if *existing != shape => {
                    issues.push((p.label.clone(), "inconsistent-label-shape".to_string()));
                }
                Some(_) => {}
                None => {
                    shapes.insert(&p.label, shape);
                }
            }
            for s in &p.rhs {
                if let Symbol::Nonterminal(n) = s {
                    if !self.nonterminals.contains(n) {
                        issues.push((p.label.clone(), format!("undeclared-nonterminal {n}")));
                    }
                }
            }
        }
        let mut spellings = BTreeSet::new();
        for t in &self.tokens {
            if let Some(s) = &t.spelling {
                if !spellings.insert(s.as_str()) {
                    issues.push((t.name.clone(), "duplicate-token-spelling".to_string()));
                }
            }
        }
        issues
    }
}

pub(crate) fn parse_production(cur: &mut Cursor) -> Result<Production, ParseError> {
    let label = cur.expect_label()?;
    cur.expect_punct(":")?;
    let lhs = match cur.peek() {
        Tok::Word(w) if is_upper_name(w) => {
            let w = w.clone();
            cur.bump();
            w
        }
        _ => return Err(cur.error(&["nonterminal"])),
    };
    cur.expect_punct("->")?;
    let mut rhs = Vec::new();
    loop {
        match cur.peek().clone() {
            Tok::Str(s) if !s.is_empty() && !s.chars().any(char::is_whitespace) => {
                cur.bump();
                rhs.push(Symbol::Literal(s));
            }
            Tok::Word(w) if is_upper_name(&w) => {
                cur.bump();
                rhs.push(Symbol::Nonterminal(w));
            }
            Tok::Word(w) if is_lower_name(&w) && LexClass::from_name(&w).is_some() => {
                cur.bump();
                rhs.push(Symbol::Class(LexClass::from_name(&w).unwrap()));
            }
            Tok::End => break,
            _ => return Err(cur.error(&["literal", "nonterminal", "`ident`", "`number`", "`string`", "end of line"])),
        }
    }
    Ok(Production { lhs, label, rhs })
}

pub fn parse_grammar_text(text: &str) -> Result<Vec<Production>, ParseError> {
    parse_lines(text, parse_production)
}

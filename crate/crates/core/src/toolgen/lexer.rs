use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Pos, Span};
use crate::metalang::{Grammar, LanguageDescription, LexClass, TokenKind as ClassKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Symbol,
    Ident,
    Number,
    String,
    Eof,
}

impl TokenKind {
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Symbol => "symbol",
            TokenKind::Ident => "ident",
            TokenKind::Number => "number",
            TokenKind::String => "string",
            TokenKind::Eof => "EOF",
        }
    }

    pub fn class(self) -> Option<LexClass> {
        match self {
            TokenKind::Ident => Some(LexClass::Ident),
            TokenKind::Number => Some(LexClass::Number),
            TokenKind::String => Some(LexClass::String),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Eof => f.write_str("EOF"),
            k => write!(f, "{} {:?}", k.name(), self.text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{line}:{column}: unexpected character {character:?}")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub character: char,
}

/// Longest-match scanner for the token classes of a grammar.
#[derive(Debug, Clone)]
pub struct Lexer {
    literals: Vec<(Vec<char>, TokenKind)>,
    ident: bool,
    number: bool,
    string: bool,
}

impl Lexer {
    pub fn new(grammar: &Grammar) -> Self {
        let mut literals = Vec::new();
        for t in &grammar.tokens {
            let kind = match t.kind {
                ClassKind::Keyword => TokenKind::Keyword,
                ClassKind::Symbol => TokenKind::Symbol,
                _ => continue,
            };
            if let Some(s) = &t.spelling {
                literals.push((s.chars().collect(), kind));
            }
        }
        Lexer {
            literals,
            ident: grammar.uses_class(LexClass::Ident),
            number: grammar.uses_class(LexClass::Number),
            string: grammar.uses_class(LexClass::String),
        }
    }

    fn candidates(&self, rest: &[char]) -> Option<(usize, TokenKind)> {
        let mut best: Option<(usize, TokenKind)> = None;
        let mut offer = |len: usize, kind: TokenKind| {
            // Longer wins; at equal length the earlier kind wins.
            if len > 0 && best.is_none_or(|(l, k)| len > l || (len == l && kind < k)) {
                best = Some((len, kind));
            }
        };
        for (lit, kind) in &self.literals {
            if rest.starts_with(lit) {
                offer(lit.len(), *kind);
            }
        }
        if self.ident && rest[0].is_ascii_alphabetic() || self.ident && rest[0] == '_' {
            let n = rest.iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count();
            offer(n, TokenKind::Ident);
        }
        if self.number && rest[0].is_ascii_digit() {
            offer(rest.iter().take_while(|c| c.is_ascii_digit()).count(), TokenKind::Number);
        }
        if self.string && rest[0] == '"' {
            let mut i = 1;
            while i < rest.len() && rest[i] != '"' && rest[i] != '\n' {
                i += if rest[i] == '\\' { 2 } else { 1 };
            }
            if i < rest.len() && rest[i] == '"' {
                offer(i + 1, TokenKind::String);
            }
        }
        best
    }

    pub fn tokenize(&self, text: &str) -> Result<Vec<Token>, LexError> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let (mut i, mut line, mut column) = (0usize, 1u32, 1u32);
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
                i += 1;
                continue;
            }
            let Some((len, kind)) = self.candidates(&chars[i..]) else {
                return Err(LexError { line, column, character: c });
            };
            let start = Pos { line, column };
            column += len as u32;
            out.push(Token {
                kind,
                text: chars[i..i + len].iter().collect(),
                span: Span { start, end: Pos { line, column } },
            });
            i += len;
        }
        let at = Pos { line, column };
        out.push(Token { kind: TokenKind::Eof, text: String::new(), span: Span { start: at, end: at } });
        Ok(out)
    }
}

pub fn tokenize(desc: &LanguageDescription, text: &str) -> Result<Vec<Token>, LexError> {
    Lexer::new(&desc.grammar).tokenize(text)
}

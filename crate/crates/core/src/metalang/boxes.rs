//! Box formatting sublanguage: `Label = box`.
//!
//! ```text
//! box ::= "text" | $N | H [hs=N] [ box+ ] | V [vs=N] [is=N] [ box+ ] | I is=N box
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use super::scan::{parse_lines, quote, Cursor, Tok};
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxExpr {
    Text(String),
    /// Rhs position of the production being formatted.
    Ref(usize),
    H { hs: u32, children: Vec<BoxExpr> },
    V { vs: u32, is: u32, children: Vec<BoxExpr> },
    I { is: u32, child: Box<BoxExpr> },
}

impl BoxExpr {
    pub fn text(s: impl Into<String>) -> Self {
        BoxExpr::Text(s.into())
    }

    pub fn h(hs: u32, children: Vec<BoxExpr>) -> Self {
        BoxExpr::H { hs, children }
    }

    pub fn v(vs: u32, is: u32, children: Vec<BoxExpr>) -> Self {
        BoxExpr::V { vs, is, children }
    }

    pub fn i(is: u32, child: BoxExpr) -> Self {
        BoxExpr::I { is, child: Box::new(child) }
    }

    /// Number of layout operators (H, V, I).
    pub fn operator_count(&self) -> usize {
        match self {
            BoxExpr::Text(_) | BoxExpr::Ref(_) => 0,
            BoxExpr::H { children, .. } | BoxExpr::V { children, .. } => {
                1 + children.iter().map(BoxExpr::operator_count).sum::<usize>()
            }
            BoxExpr::I { child, .. } => 1 + child.operator_count(),
        }
    }

    pub fn count_v(&self) -> usize {
        match self {
            BoxExpr::Text(_) | BoxExpr::Ref(_) => 0,
            BoxExpr::H { children, .. } => children.iter().map(BoxExpr::count_v).sum(),
            BoxExpr::V { children, .. } => 1 + children.iter().map(BoxExpr::count_v).sum::<usize>(),
            BoxExpr::I { child, .. } => child.count_v(),
        }
    }

    pub fn count_i(&self) -> usize {
        match self {
            BoxExpr::Text(_) | BoxExpr::Ref(_) => 0,
            BoxExpr::H { children, .. } | BoxExpr::V { children, .. } => {
                children.iter().map(BoxExpr::count_i).sum()
            }
            BoxExpr::I { child, .. } => 1 + child.count_i(),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&BoxExpr> {
        let mut out = Vec::new();
        fn walk<'a>(b: &'a BoxExpr, out: &mut Vec<&'a BoxExpr>) {
            match b {
                BoxExpr::Text(_) | BoxExpr::Ref(_) => out.push(b),
                BoxExpr::H { children, .. } | BoxExpr::V { children, .. } => {
                    children.iter().for_each(|c| walk(c, out))
                }
                BoxExpr::I { child, .. } => walk(child, out),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Structural problems independent of any production: empty H/V,
    /// zero indentation on I, newlines inside Text.
    pub fn shape_issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(b: &BoxExpr, out: &mut Vec<String>) {
            match b {
                BoxExpr::Text(s) if s.contains('\n') => out.push("text-contains-newline".into()),
                BoxExpr::Text(_) | BoxExpr::Ref(_) => {}
                BoxExpr::H { children, .. } | BoxExpr::V { children, .. } => {
                    if children.is_empty() {
                        out.push("empty-composite".into());
                    }
                    children.iter().for_each(|c| walk(c, out));
                }
                BoxExpr::I { is, child } => {
                    if *is == 0 {
                        out.push("zero-indent".into());
                    }
                    walk(child, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for BoxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxExpr::Text(s) => f.write_str(&quote(s)),
            BoxExpr::Ref(i) => write!(f, "${i}"),
            BoxExpr::H { hs, children } => {
                write!(f, "H hs={hs} [")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(" ]")
            }
            BoxExpr::V { vs, is, children } => {
                write!(f, "V vs={vs} is={is} [")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(" ]")
            }
            BoxExpr::I { is, child } => write!(f, "I is={is} {child}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxRule {
    pub label: String,
    pub body: BoxExpr,
}

impl fmt::Display for BoxRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.label, self.body)
    }
}

fn parse_option(cur: &mut Cursor, name: &'static str) -> Result<Option<u32>, ParseError> {
    if matches!(cur.peek(), Tok::Word(w) if w == name) && matches!(cur.peek_at(1), Tok::Punct("=")) {
        cur.bump();
        cur.bump();
        return cur.expect_num().map(Some);
    }
    Ok(None)
}

fn parse_children(cur: &mut Cursor) -> Result<Vec<BoxExpr>, ParseError> {
    cur.expect_punct("[")?;
    let mut children = Vec::new();
    while !cur.eat_punct("]") {
        if matches!(cur.peek(), Tok::End) {
            return Err(cur.error(&["box", "`]`"]));
        }
        children.push(parse_box(cur)?);
    }
    if children.is_empty() {
        return Err(cur.error(&["box"]));
    }
    Ok(children)
}

pub(crate) fn parse_box(cur: &mut Cursor) -> Result<BoxExpr, ParseError> {
    match cur.peek().clone() {
        Tok::Str(s) => {
            cur.bump();
            Ok(BoxExpr::Text(s))
        }
        Tok::ChildRef(i) => {
            cur.bump();
            Ok(BoxExpr::Ref(i))
        }
        Tok::Word(w) if w == "H" => {
            cur.bump();
            let hs = parse_option(cur, "hs")?.unwrap_or(1);
            Ok(BoxExpr::H { hs, children: parse_children(cur)? })
        }
        Tok::Word(w) if w == "V" => {
            cur.bump();
            let mut vs = None;
            let mut is = None;
            for _ in 0..2 {
                if vs.is_none() {
                    if let Some(v) = parse_option(cur, "vs")? {
                        vs = Some(v);
                        continue;
                    }
                }
                if is.is_none() {
                    if let Some(v) = parse_option(cur, "is")? {
                        is = Some(v);
                    }
                }
            }
            Ok(BoxExpr::V { vs: vs.unwrap_or(0), is: is.unwrap_or(0), children: parse_children(cur)? })
        }
        Tok::Word(w) if w == "I" => {
            cur.bump();
            let is = match parse_option(cur, "is")? {
                Some(0) | None => return Err(cur.error(&["`is=N` with N >= 1"])),
                Some(n) => n,
            };
            Ok(BoxExpr::I { is, child: Box::new(parse_box(cur)?) })
        }
        _ => Err(cur.error(&["string", "`$N`", "`H`", "`V`", "`I`"])),
    }
}

pub(crate) fn parse_box_rule(cur: &mut Cursor) -> Result<BoxRule, ParseError> {
    let label = cur.expect_label()?;
    cur.expect_punct("=")?;
    let body = parse_box(cur)?;
    Ok(BoxRule { label, body })
}

pub fn parse_box_text(text: &str) -> Result<Vec<BoxRule>, ParseError> {
    parse_lines(text, parse_box_rule)
}

/// Parses a single box expression (no label).
pub fn parse_box_expr(text: &str) -> Result<BoxExpr, ParseError> {
    let mut cur = Cursor::new(text, 1)?;
    let b = parse_box(&mut cur)?;
    cur.expect_end()?;
    Ok(b)
}

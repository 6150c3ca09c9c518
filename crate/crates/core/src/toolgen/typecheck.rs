use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Span, Term};
use crate::metalang::{GroundType, Judgment, LanguageDescription, LexClass, Production, TypeTerm, TypingRule};

/// An error in the checked program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TypeError {
    pub span: Option<Span>,
    /// Label of the offending node.
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<GroundType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found: Option<GroundType>,
    pub message: String,
}

impl std::fmt::Display for TypeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(s) = self.span {
            write!(f, "{}: ", s.start)?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum TypecheckError {
    /// The description has no typing rule for this label.
    #[error("no typing rule for `{label}`")]
    NoRule { label: String },
    #[error("the language is untyped")]
    Untyped,
    #[error("{} type error(s)", errors.len())]
    TypeErrors { errors: Vec<TypeError> },
}

struct Checker<'a> {
    desc: &'a LanguageDescription,
    rules: &'a BTreeMap<String, TypingRule>,
    env: HashMap<String, GroundType>,
    errors: Vec<TypeError>,
}

impl Checker<'_> {
    fn error(&mut self, t: &Term, expected: Option<GroundType>, found: Option<GroundType>, message: String) {
        self.errors.push(TypeError { span: t.span, label: t.label.clone(), expected, found, message });
    }

    /// `None` when the subtree failed; its errors are already recorded.
    fn check(&mut self, t: &Term) -> Result<Option<GroundType>, TypecheckError> {
        if let Some(spelling) = &t.payload {
            return Ok(match LexClass::from_name(&t.label) {
                Some(LexClass::Number) => Some(GroundType::Int),
                Some(LexClass::String) => Some(GroundType::String),
                _ => self.lookup(t, spelling),
            });
        }
        let rule = self.rules.get(&t.label).ok_or_else(|| TypecheckError::NoRule { label: t.label.clone() })?;
        let prod = self.desc.production(&t.label).ok_or_else(|| TypecheckError::NoRule { label: t.label.clone() })?;
        let mut subst: HashMap<&str, GroundType> = HashMap::new();
        let mut failed = false;
        for premise in &rule.premises {
            match premise {
                Judgment::TypeOf { child, ty } => {
                    let Some(c) = child_of(prod, t, *child) else { failed = true; continue };
                    match self.check(c)? {
                        Some(found) => failed |= !self.unify(c, ty, found, &mut subst),
                        None => failed = true,
                    }
                }
                Judgment::Lookup { child, ty } => {
                    let Some(c) = child_of(prod, t, *child) else { failed = true; continue };
                    let name = c.payload.clone().unwrap_or_default();
                    match self.lookup(c, &name) {
                        Some(found) => failed |= !self.unify(c, ty, found, &mut subst),
                        None => failed = true,
                    }
                }
                Judgment::Bind { child, ty } => {
                    let Some(c) = child_of(prod, t, *child) else { failed = true; continue };
                    let Some(g) = resolve(ty, &subst) else { failed = true; continue };
                    let name = c.payload.clone().unwrap_or_default();
                    match self.env.get(&name) {
                        Some(&old) if old != g => {
                            self.error(c, Some(old), Some(g), format!("`{name}` has type {old}, cannot rebind it to {g}"));
                            failed = true;
                        }
                        _ => {
                            self.env.insert(name, g);
                        }
                    }
                }
                Judgment::Eq { left, right } => match (resolve(left, &subst), resolve(right, &subst)) {
                    (Some(a), Some(b)) if a != b => {
                        self.error(t, Some(a), Some(b), format!("expected {a}, found {b}"));
                        failed = true;
                    }
                    (Some(_), Some(_)) => {}
                    (Some(g), None) => failed |= !self.unify(t, right, g, &mut subst),
                    (None, Some(g)) => failed |= !self.unify(t, left, g, &mut subst),
                    (None, None) => failed = true,
                },
            }
        }
        if failed {
            return Ok(None);
        }
        Ok(resolve(&rule.conclusion, &subst))
    }

    fn lookup(&mut self, t: &Term, name: &str) -> Option<GroundType> {
        let found = self.env.get(name).copied();
        if found.is_none() {
            self.error(t, None, None, format!("`{name}` is not declared"));
        }
        found
    }

    /// Matches `found` against the expected type term, recording an error
    /// on `at` when they disagree.
    fn unify<'r>(&mut self, at: &Term, ty: &'r TypeTerm, found: GroundType, subst: &mut HashMap<&'r str, GroundType>) -> bool {
        let expected = match ty {
            TypeTerm::Ground(g) => *g,
            TypeTerm::Var(v) => match subst.get(v.as_str()) {
                Some(g) => *g,
                None => {
                    subst.insert(v, found);
                    return true;
                }
            },
        };
        if expected != found {
            self.error(at, Some(expected), Some(found), format!("expected {expected}, found {found}"));
            return false;
        }
        true
    }
}

fn child_of<'t>(prod: &Production, t: &'t Term, pos: usize) -> Option<&'t Term> {
    t.children.get(prod.child_index_of(pos)?)
}

fn resolve(ty: &TypeTerm, subst: &HashMap<&str, GroundType>) -> Option<GroundType> {
    match ty {
        TypeTerm::Ground(g) => Some(*g),
        TypeTerm::Var(v) => subst.get(v.as_str()).copied(),
    }
}

/// Syntax-directed, single left-to-right pass with one flat environment.
pub fn typecheck(desc: &LanguageDescription, t: &Term) -> Result<GroundType, TypecheckError> {
    let rules = desc.typing.as_ref().ok_or(TypecheckError::Untyped)?;
    let mut c = Checker { desc, rules, env: HashMap::new(), errors: Vec::new() };
    let result = c.check(t)?;
    match result {
        Some(g) if c.errors.is_empty() => Ok(g),
        _ => Err(TypecheckError::TypeErrors { errors: c.errors }),
    }
}

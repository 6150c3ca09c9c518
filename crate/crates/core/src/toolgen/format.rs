use serde::{Deserialize, Serialize};

use super::render::render;
use super::Term;
use crate::metalang::{BoxExpr, LanguageDescription};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum FormatError {
    #[error("no Box rule for `{label}`")]
    MissingRule { label: String },
    #[error("term `{label}` does not match its production")]
    Malformed { label: String },
}

/// Replaces every `$i` in the node's Box rule by the box of the child at
/// rhs position `i`; leaves become their spelling.
pub fn instantiate(desc: &LanguageDescription, t: &Term) -> Result<BoxExpr, FormatError> {
    if let Some(p) = &t.payload {
        return Ok(BoxExpr::Text(p.clone()));
    }
    let rule = desc.formatting.get(&t.label).ok_or_else(|| FormatError::MissingRule { label: t.label.clone() })?;
    let prod = desc.production(&t.label).ok_or_else(|| FormatError::Malformed { label: t.label.clone() })?;
    if prod.arity() != t.children.len() {
        return Err(FormatError::Malformed { label: t.label.clone() });
    }
    fn subst(
        desc: &LanguageDescription,
        b: &BoxExpr,
        t: &Term,
        prod: &crate::metalang::Production,
    ) -> Result<BoxExpr, FormatError> {
        Ok(match b {
            BoxExpr::Text(_) => b.clone(),
            BoxExpr::Ref(pos) => {
                let i = prod.child_index_of(*pos).ok_or_else(|| FormatError::Malformed { label: t.label.clone() })?;
                instantiate(desc, &t.children[i])?
            }
            BoxExpr::H { hs, children } => BoxExpr::H {
                hs: *hs,
                children: children.iter().map(|c| subst(desc, c, t, prod)).collect::<Result<_, _>>()?,
            },
            BoxExpr::V { vs, is, children } => BoxExpr::V {
                vs: *vs,
                is: *is,
                children: children.iter().map(|c| subst(desc, c, t, prod)).collect::<Result<_, _>>()?,
            },
            BoxExpr::I { is, child } => BoxExpr::I { is: *is, child: Box::new(subst(desc, child, t, prod)?) },
        })
    }
    subst(desc, rule, t, prod)
}

pub fn format_term(desc: &LanguageDescription, t: &Term) -> Result<String, FormatError> {
    Ok(render(&instantiate(desc, t)?))
}

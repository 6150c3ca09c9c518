use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::derive::violations;
use super::{ConstraintViolation, Decision, DesignSession};
use crate::knowledge::{ConceptId, ConceptKind, FacetBundle, KnowledgeBase};
use crate::metalang::{parse_grammar_text, template};

/// A building block with every template instantiated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResolvedBlock {
    pub concept: ConceptId,
    pub params: BTreeMap<String, String>,
    pub facets: FacetBundle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LanguageDesign {
    pub kb_ref: String,
    pub name: String,
    pub start: String,
    pub log: Vec<Decision>,
    /// Every selected concept, building block or not.
    pub selected: Vec<ConceptId>,
    pub blocks: Vec<ResolvedBlock>,
}

impl LanguageDesign {
    pub fn has(&self, concept: &str) -> bool {
        self.selected.iter().any(|c| c.as_str() == concept)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum FinalizeError {
    #[error("design is unresolved: {} violation(s), {} pending consequence(s)", violations.len(), pending.len())]
    UnresolvedDesign { violations: Vec<ConstraintViolation>, pending: Vec<ConceptId> },
    #[error("no selected building block defines start symbol `{start}`")]
    UnknownStartSymbol { start: String },
}

pub fn finalize(
    kb: &KnowledgeBase,
    session: &DesignSession,
    name: &str,
    start: &str,
) -> Result<LanguageDesign, FinalizeError> {
    // At finalize time only selected blocks count as covering a hole.
    let violations = violations(kb, &session.selected, &session.selected);
    if !violations.is_empty() || !session.pending.is_empty() {
        return Err(FinalizeError::UnresolvedDesign { violations, pending: session.pending.clone() });
    }

    let mut blocks = Vec::new();
    for id in &session.selected {
        let Some(concept) = kb.concept(id.as_str()) else { continue };
        if concept.kind != ConceptKind::BuildingBlock {
            continue;
        }
        let mut params: BTreeMap<String, String> =
            concept.parameters.iter().map(|p| (p.name.clone(), p.default.clone())).collect();
        if let Some(set) = session.params.get(id) {
            params.extend(set.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        let renames = session.renames.get(id).cloned().unwrap_or_default();
        let facets = concept.facets.clone().unwrap_or_default();
        let resolve = |lines: &[String], rename: bool| -> Vec<String> {
            lines.iter().filter_map(|l| resolve_line(l, &params, if rename { Some(&renames) } else { None })).collect()
        };
        let resolved = FacetBundle {
            syntax: resolve(&facets.syntax, true),
            formatting: resolve(&facets.formatting, true),
            typing: resolve(&facets.typing, false),
            evaluation: resolve(&facets.evaluation, false),
            nonterminals: facets.nonterminals.clone(),
            holes: facets.holes.clone(),
        };
        blocks.push(ResolvedBlock { concept: id.clone(), params, facets: resolved });
    }

    let defines_start = blocks.iter().any(|b| {
        b.facets.nonterminals.iter().any(|n| n == start)
            || b.facets
                .syntax
                .iter()
                .filter_map(|l| parse_grammar_text(l).ok())
                .flatten()
                .any(|p| p.lhs == start)
    });
    if !defines_start {
        return Err(FinalizeError::UnknownStartSymbol { start: start.to_string() });
    }

    Ok(LanguageDesign {
        kb_ref: session.kb_ref.clone(),
        name: name.to_string(),
        start: start.to_string(),
        log: session.log.clone(),
        selected: session.selected.iter().cloned().collect(),
        blocks,
    })
}

/// Drops a line whose guard does not match, then substitutes parameters and
/// applies literal renames.
fn resolve_line(
    line: &str,
    params: &BTreeMap<String, String>,
    renames: Option<&BTreeMap<String, String>>,
) -> Option<String> {
    let (guard, body) = template::split_guard(line).ok()?;
    if let Some(g) = guard {
        let value = params.get(&g.param)?;
        if !g.values.contains(value) {
            return None;
        }
    }
    let mut out = body.trim().to_string();
    if let Some(renames) = renames {
        out = template::rename_literals(&out, |s| renames.get(s).cloned());
    }
    Some(template::substitute(&out, |n| params.get(n).cloned()))
}

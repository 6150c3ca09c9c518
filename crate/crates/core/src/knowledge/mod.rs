//! The language knowledge base: concepts, relations between them, and
//! design advice, plus its JSON document format.

mod query;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::metalang::{self, template, FacetKind};
use crate::report::{Issue, ValidationReport};

pub use query::{query_kb, Direction, Query, QueryError};

pub const KB_FORMAT_VERSION: &str = "lda-kb/1";
pub const REQUIRES: &str = "requires";
pub const CONFLICTS: &str = "conflicts";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        ConceptId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `[a-z][a-z0-9-]*`
    pub fn is_well_formed(id: &str) -> bool {
        let mut chars = id.chars();
        chars.next().is_some_and(|c| c.is_ascii_lowercase())
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
    }
}

impl Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    fn from(s: &str) -> Self {
        ConceptId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConceptKind {
    BuildingBlock,
    Attribute,
    Runtime,
    Processing,
}

impl ConceptKind {
    pub const ALL: [ConceptKind; 4] =
        [ConceptKind::BuildingBlock, ConceptKind::Attribute, ConceptKind::Runtime, ConceptKind::Processing];

    pub fn name(self) -> &'static str {
        match self {
            ConceptKind::BuildingBlock => "building-block",
            ConceptKind::Attribute => "attribute",
            ConceptKind::Runtime => "runtime",
            ConceptKind::Processing => "processing",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ConceptKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDecl {
    pub name: String,
    pub allowed: Vec<String>,
    pub default: String,
}

/// The facet fragments a building block contributes. Lines are templates
/// in the metalang sublanguages (see [`metalang::template`]).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FacetBundle {
    pub syntax: Vec<String>,
    pub formatting: Vec<String>,
    pub typing: Vec<String>,
    pub evaluation: Vec<String>,
    /// Nonterminal categories this block introduces without productions.
    pub nonterminals: Vec<String>,
    /// Nonterminals referenced but defined by other blocks.
    pub holes: Vec<String>,
}

impl FacetBundle {
    pub fn lines(&self, kind: FacetKind) -> &[String] {
        match kind {
            FacetKind::Grammar => &self.syntax,
            FacetKind::Box => &self.formatting,
            FacetKind::Typing => &self.typing,
            FacetKind::Eval => &self.evaluation,
        }
    }

    pub fn is_empty(&self) -> bool {
        FacetKind::ALL.iter().all(|k| self.lines(*k).is_empty()) && self.nonterminals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageConcept {
    pub kind: ConceptKind,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<FacetBundle>,
    #[serde(default)]
    pub parameters: Vec<ParameterDecl>,
}

impl LanguageConcept {
    pub fn parameter(&self, name: &str) -> Option<&ParameterDecl> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// Instantiates one template line with the parameter defaults.
    fn with_defaults(&self, line: &str) -> String {
        template::substitute(line, |n| self.parameter(n).map(|p| p.default.clone()))
    }

    /// Parsed productions of all syntax lines (guards ignored, defaults applied).
    pub fn productions(&self) -> Vec<metalang::Production> {
        let Some(f) = &self.facets else { return Vec::new() };
        f.syntax
            .iter()
            .filter_map(|l| {
                let (_, body) = template::split_guard(l).ok()?;
                metalang::parse_grammar_text(&self.with_defaults(body)).ok()
            })
            .flatten()
            .collect()
    }

    /// Nonterminals this block defines productions for or declares.
    pub fn owned_nonterminals(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.productions().into_iter().map(|p| p.lhs).collect();
        if let Some(f) = &self.facets {
            out.extend(f.nonterminals.iter().cloned());
        }
        out
    }

    pub fn holes(&self) -> &[String] {
        self.facets.as_ref().map(|f| f.holes.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub name: String,
    pub arity: u8,
    #[serde(default)]
    pub pairs: BTreeSet<(ConceptId, ConceptId)>,
    #[serde(default)]
    pub members: BTreeSet<ConceptId>,
}

impl Relation {
    pub fn binary(name: &str, pairs: impl IntoIterator<Item = (&'static str, &'static str)>) -> Self {
        Relation {
            name: name.to_string(),
            arity: 2,
            pairs: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
            members: BTreeSet::new(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.name == CONFLICTS
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Has(ConceptId),
    All(Vec<Condition>),
    Any(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn holds(&self, selected: &BTreeSet<ConceptId>) -> bool {
        match self {
            Condition::Has(id) => selected.contains(id),
            Condition::All(cs) => cs.iter().all(|c| c.holds(selected)),
            Condition::Any(cs) => cs.iter().any(|c| c.holds(selected)),
            Condition::Not(c) => !c.holds(selected),
        }
    }

    pub fn referenced_ids(&self) -> Vec<&ConceptId> {
        match self {
            Condition::Has(id) => vec![id],
            Condition::All(cs) | Condition::Any(cs) => cs.iter().flat_map(Condition::referenced_ids).collect(),
            Condition::Not(c) => c.referenced_ids(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Hint,
    Warning,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Hint => "hint",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdviceRule {
    pub id: String,
    pub condition: Condition,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeBase {
    pub version: String,
    pub concepts: BTreeMap<ConceptId, LanguageConcept>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    #[serde(default)]
    pub advice: Vec<AdviceRule>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KbError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("knowledge base is invalid:\n{0}")]
    Validation(ValidationReport),
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        KnowledgeBase {
            version: KB_FORMAT_VERSION.to_string(),
            concepts: BTreeMap::new(),
            relations: Vec::new(),
            advice: Vec::new(),
        }
    }

    pub fn concept(&self, id: &str) -> Option<&LanguageConcept> {
        self.concepts.get(id)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Direct `requires` successors of `id`, sorted.
    pub fn requires_of(&self, id: &str) -> Vec<&ConceptId> {
        match self.relation(REQUIRES) {
            Some(r) => r.pairs.iter().filter(|(a, _)| a.as_str() == id).map(|(_, b)| b).collect(),
            None => Vec::new(),
        }
    }

    /// Conflicting pairs as unordered pairs `(a, b)` with `a < b`.
    pub fn conflict_pairs(&self) -> BTreeSet<(ConceptId, ConceptId)> {
        match self.relation(CONFLICTS) {
            Some(r) => r
                .pairs
                .iter()
                .map(|(a, b)| if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
                .collect(),
            None => BTreeSet::new(),
        }
    }

    /// Building blocks that own `nonterminal`.
    pub fn owners_of(&self, nonterminal: &str) -> Vec<&ConceptId> {
        self.concepts
            .iter()
            .filter(|(_, c)| c.kind == ConceptKind::BuildingBlock && c.owned_nonterminals().contains(nonterminal))
            .map(|(id, _)| id)
            .collect()
    }

    /// Content hash of the canonical document.
    pub fn content_hash(&self) -> String {
        canonical::content_hash(self)
    }
}

pub fn load_kb(document: &str) -> Result<KnowledgeBase, KbError> {
    let kb: KnowledgeBase = serde_json::from_str(document).map_err(|e| KbError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let report = validate_kb(&kb);
    if report.is_empty() {
        Ok(kb)
    } else {
        Err(KbError::Validation(report))
    }
}

/// Canonical document form (sorted keys, compact, trailing newline).
pub fn save_kb(kb: &KnowledgeBase) -> String {
    canonical::to_canonical_file(kb)
}

pub fn validate_kb(kb: &KnowledgeBase) -> ValidationReport {
    let mut report = ValidationReport::default();
    if kb.version != KB_FORMAT_VERSION {
        report.push(Issue::new(
            "version",
            "unsupported-version",
            format!("expected {KB_FORMAT_VERSION:?}, found {:?}", kb.version),
        ));
    }
    for (id, concept) in &kb.concepts {
        validate_concept(id, concept, &mut report);
    }

    let known = |id: &ConceptId| kb.concepts.contains_key(id);
    let mut names = BTreeSet::new();
    for rel in &kb.relations {
        let path = format!("relations.{}", rel.name);
        if !names.insert(rel.name.as_str()) {
            report.push(Issue::new(&path, "duplicate-relation", "relation declared twice").with_ids([&rel.name]));
        }
        match rel.arity {
            1 if !rel.pairs.is_empty() => {
                report.push(Issue::new(&path, "arity-mismatch", "unary relation lists pairs"));
            }
            2 if !rel.members.is_empty() => {
                report.push(Issue::new(&path, "arity-mismatch", "binary relation lists members"));
            }
            1 | 2 => {}
            n => report.push(Issue::new(&path, "bad-arity", format!("arity must be 1 or 2, found {n}"))),
        }
        if (rel.name == REQUIRES || rel.name == CONFLICTS) && rel.arity != 2 {
            report.push(Issue::new(&path, "bad-arity", "requires/conflicts are binary"));
        }
        for (a, b) in &rel.pairs {
            for id in [a, b] {
                if !known(id) {
                    report.push(
                        Issue::new(&path, "unknown-id", format!("relation references unknown concept `{id}`"))
                            .with_ids([id.as_str()]),
                    );
                }
            }
            if a == b && (rel.name == REQUIRES || rel.name == CONFLICTS) {
                report.push(
                    Issue::new(&path, "reflexive-pair", format!("`{a}` cannot {} itself", rel.name))
                        .with_ids([a.as_str()]),
                );
            }
        }
        for id in &rel.members {
            if !known(id) {
                report.push(
                    Issue::new(&path, "unknown-id", format!("relation references unknown concept `{id}`"))
                        .with_ids([id.as_str()]),
                );
            }
        }
    }

    let mut advice_ids = BTreeSet::new();
    for rule in &kb.advice {
        let path = format!("advice.{}", rule.id);
        if !advice_ids.insert(rule.id.as_str()) {
            report.push(Issue::new(&path, "duplicate-advice", "advice id declared twice").with_ids([&rule.id]));
        }
        for id in rule.condition.referenced_ids() {
            if !known(id) {
                report.push(
                    Issue::new(&path, "unknown-id", format!("condition references unknown concept `{id}`"))
                        .with_ids([id.as_str()]),
                );
            }
        }
    }
    report.finish()
}

fn validate_concept(id: &ConceptId, concept: &LanguageConcept, report: &mut ValidationReport) {
    let path = format!("concepts.{id}");
    if !ConceptId::is_well_formed(id.as_str()) {
        report.push(Issue::new(&path, "bad-id", "ids match [a-z][a-z0-9-]*").with_ids([id.as_str()]));
    }
    match (concept.kind, &concept.facets) {
        (ConceptKind::BuildingBlock, None) => {
            report.push(Issue::new(&path, "missing-facets", "building blocks carry facets").with_ids([id.as_str()]))
        }
        (kind, Some(_)) if kind != ConceptKind::BuildingBlock => report.push(
            Issue::new(&path, "unexpected-facets", format!("{kind} concepts carry no facets")).with_ids([id.as_str()]),
        ),
        _ => {}
    }
    let mut param_names = BTreeSet::new();
    for p in &concept.parameters {
        if !param_names.insert(p.name.as_str()) {
            report.push(
                Issue::new(&path, "duplicate-parameter", format!("parameter `{}` declared twice", p.name))
                    .with_ids([id.as_str()]),
            );
        }
        if template::param_refs(&format!("${}", p.name)) != [p.name.clone()] {
            report.push(
                Issue::new(&path, "bad-parameter-name", format!("parameter `{}` must match [a-z][a-z0-9_]*", p.name))
                    .with_ids([id.as_str()]),
            );
        }
        if !p.allowed.contains(&p.default) {
            report.push(
                Issue::new(
                    &path,
                    "default-not-allowed",
                    format!("default `{}` of `{}` is not an allowed value", p.default, p.name),
                )
                .with_ids([id.as_str()]),
            );
        }
        if p.allowed.iter().any(|v| v.is_empty() || v.contains(|c: char| c.is_whitespace() || c == '"')) {
            report.push(
                Issue::new(&path, "bad-parameter-value", format!("values of `{}` must be nonblank words", p.name))
                    .with_ids([id.as_str()]),
            );
        }
    }
    let Some(facets) = &concept.facets else { return };

    for kind in FacetKind::ALL {
        for (n, line) in facets.lines(kind).iter().enumerate() {
            let line_path = format!("{path}.facets.{}[{n}]", kind.name());
            let (guard, body) = match template::split_guard(line) {
                Ok(split) => split,
                Err(msg) => {
                    report.push(Issue::new(&line_path, "bad-guard", msg).with_ids([id.as_str()]));
                    continue;
                }
            };
            for name in template::param_refs(line) {
                if concept.parameter(&name).is_none() {
                    report.push(
                        Issue::new(&line_path, "undeclared-parameter", format!("template uses undeclared `${name}`"))
                            .with_ids([id.as_str(), name.as_str()]),
                    );
                }
            }
            if let Some(g) = guard {
                if let Some(p) = concept.parameter(&g.param) {
                    for v in g.values.iter().filter(|v| !p.allowed.contains(v)) {
                        report.push(
                            Issue::new(&line_path, "bad-guard", format!("`{v}` is not a value of `${}`", g.param))
                                .with_ids([id.as_str()]),
                        );
                    }
                }
            }
            if let Err(e) = metalang::parse_facet(kind, &concept.with_defaults(body)) {
                report.push(Issue::new(&line_path, "facet-parse-error", e.to_string()).with_ids([id.as_str()]));
            }
        }
    }

    let owned = concept.owned_nonterminals();
    for p in concept.productions() {
        for nt in p.rhs.iter().filter_map(|s| s.as_nonterminal()) {
            if !owned.contains(nt) && !facets.holes.iter().any(|h| h == nt) {
                report.push(
                    Issue::new(
                        format!("{path}.facets.syntax"),
                        "undeclared-hole",
                        format!("`{}` references `{nt}`, neither owned nor declared as a hole", p.label),
                    )
                    .with_ids([id.as_str()]),
                );
            }
        }
    }
    for h in &facets.holes {
        if owned.contains(h) {
            report.push(
                Issue::new(format!("{path}.facets.holes"), "owned-hole", format!("`{h}` is owned by this concept"))
                    .with_ids([id.as_str()]),
            );
        }
    }
}

#[cfg(test)]
mod tests;

//! The compiled language description consumed by the generated tools.
//!
//! On disk (`.desc.json`) every production and rule is stored in its
//! sublanguage's canonical text, one string per item.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::eval::{EvalTarget, Premise};
use super::{
    parse_box_text, parse_eval_text, parse_grammar_text, parse_typing_text, BoxExpr, EvalRule, Grammar, Judgment,
    LexClass, Production, Symbol, TokenClass, TypingRule,
};
use crate::knowledge::ConceptId;
use crate::report::{Issue, ValidationReport};
use crate::session::LanguageDesign;

pub const DESC_FORMAT_VERSION: &str = "lda-desc/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DescriptionDoc", try_from = "DescriptionDoc")]
pub struct LanguageDescription {
    pub name: String,
    pub grammar: Grammar,
    /// Box rule per production label.
    pub formatting: BTreeMap<String, BoxExpr>,
    /// Absent for untyped languages.
    pub typing: Option<BTreeMap<String, TypingRule>>,
    pub evaluation: BTreeMap<String, EvalRule>,
    /// `production:Lhs/Label`, `formatting:Label`, `typing:Label`,
    /// `evaluation:Label` to the concept that contributed the item.
    pub provenance: BTreeMap<String, ConceptId>,
}

impl LanguageDescription {
    pub fn production(&self, label: &str) -> Option<&Production> {
        self.grammar.production_by_label(label)
    }

    /// Keywords of the language, used by generators to avoid clashes.
    pub fn keywords(&self) -> Vec<&str> {
        self.grammar
            .tokens
            .iter()
            .filter(|t| t.kind == super::TokenKind::Keyword)
            .filter_map(|t| t.spelling.as_deref())
            .collect()
    }

    pub fn to_json(&self) -> String {
        crate::canonical::to_canonical_file(self)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct DescriptionDoc {
    version: String,
    name: String,
    start: String,
    tokens: Vec<TokenClass>,
    grammar: Vec<String>,
    formatting: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    typing: Option<Vec<String>>,
    evaluation: Vec<String>,
    provenance: BTreeMap<String, ConceptId>,
}

impl From<LanguageDescription> for DescriptionDoc {
    fn from(d: LanguageDescription) -> Self {
        DescriptionDoc {
            version: DESC_FORMAT_VERSION.to_string(),
            name: d.name,
            start: d.grammar.start.clone(),
            tokens: d.grammar.tokens.clone(),
            grammar: d.grammar.productions.iter().map(ToString::to_string).collect(),
            formatting: d.formatting.iter().map(|(l, b)| format!("{l} = {b}")).collect(),
            typing: d.typing.map(|t| t.values().map(ToString::to_string).collect()),
            evaluation: d.evaluation.values().map(ToString::to_string).collect(),
            provenance: d.provenance,
        }
    }
}

impl TryFrom<DescriptionDoc> for LanguageDescription {
    type Error = String;

    fn try_from(doc: DescriptionDoc) -> Result<Self, String> {
        if doc.version != DESC_FORMAT_VERSION {
            return Err(format!("unsupported description version {:?}", doc.version));
        }
        let err = |what: &str, e: super::ParseError| format!("{what}: {e}");
        let productions = parse_grammar_text(&doc.grammar.join("\n")).map_err(|e| err("grammar", e))?;
        let grammar = Grammar::new(doc.start, productions);
        if grammar.tokens != doc.tokens {
            return Err("token table does not match the grammar".to_string());
        }
        let formatting = parse_box_text(&doc.formatting.join("\n"))
            .map_err(|e| err("formatting", e))?
            .into_iter()
            .map(|r| (r.label, r.body))
            .collect();
        let typing = match doc.typing {
            Some(lines) => Some(
                parse_typing_text(&lines.join("\n"))
                    .map_err(|e| err("typing", e))?
                    .into_iter()
                    .map(|r| (r.label.clone(), r))
                    .collect(),
            ),
            None => None,
        };
        let evaluation = parse_eval_text(&doc.evaluation.join("\n"))
            .map_err(|e| err("evaluation", e))?
            .into_iter()
            .map(|r| (r.label.clone(), r))
            .collect();
        Ok(LanguageDescription { name: doc.name, grammar, formatting, typing, evaluation, provenance: doc.provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum CompileError {
    #[error("`{first}` and `{second}` define {item} differently")]
    MergeConflict { item: String, first: ConceptId, second: ConceptId },
    #[error("nonterminal `{nonterminal}` is used but has no productions")]
    HoleUnfilled { nonterminal: String },
    #[error("facet of `{concept}` does not parse: {message}")]
    BadFacet { concept: ConceptId, message: String },
    #[error("compiled description is invalid:\n{report}")]
    Invalid { report: ValidationReport },
}

/// Inserts `value` under `key`, collapsing identical duplicates.
fn merge<T: PartialEq>(
    map: &mut BTreeMap<String, T>,
    provenance: &mut BTreeMap<String, ConceptId>,
    key: String,
    prov_key: String,
    value: T,
    concept: &ConceptId,
) -> Result<(), CompileError> {
    match map.get(&key) {
        Some(existing) if *existing == value => Ok(()),
        Some(_) => Err(CompileError::MergeConflict {
            item: prov_key.clone(),
            first: provenance[&prov_key].clone(),
            second: concept.clone(),
        }),
        None => {
            map.insert(key, value);
            provenance.insert(prov_key, concept.clone());
            Ok(())
        }
    }
}

pub fn compile_design(design: &LanguageDesign) -> Result<LanguageDescription, CompileError> {
    let mut blocks: Vec<_> = design.blocks.iter().collect();
    blocks.sort_by(|a, b| a.concept.cmp(&b.concept));

    let mut productions: BTreeMap<String, Production> = BTreeMap::new();
    let mut formatting = BTreeMap::new();
    let mut typing = BTreeMap::new();
    let mut evaluation = BTreeMap::new();
    let mut provenance = BTreeMap::new();
    let bad = |concept: &ConceptId, e: super::ParseError| CompileError::BadFacet {
        concept: concept.clone(),
        message: e.to_string(),
    };

    for b in blocks {
        let id = &b.concept;
        for p in parse_grammar_text(&b.facets.syntax.join("\n")).map_err(|e| bad(id, e))? {
            let key = format!("{}/{}", p.lhs, p.label);
            merge(&mut productions, &mut provenance, key.clone(), format!("production:{key}"), p, id)?;
        }
        for r in parse_box_text(&b.facets.formatting.join("\n")).map_err(|e| bad(id, e))? {
            let key = r.label.clone();
            merge(&mut formatting, &mut provenance, key.clone(), format!("formatting:{key}"), r.body, id)?;
        }
        for r in parse_typing_text(&b.facets.typing.join("\n")).map_err(|e| bad(id, e))? {
            let key = r.label.clone();
            merge(&mut typing, &mut provenance, key.clone(), format!("typing:{key}"), r, id)?;
        }
        for r in parse_eval_text(&b.facets.evaluation.join("\n")).map_err(|e| bad(id, e))? {
            let key = r.label.clone();
            merge(&mut evaluation, &mut provenance, key.clone(), format!("evaluation:{key}"), r, id)?;
        }
    }

    for p in productions.values() {
        for nt in p.rhs.iter().filter_map(Symbol::as_nonterminal) {
            if !productions.values().any(|q| q.lhs == nt) {
                return Err(CompileError::HoleUnfilled { nonterminal: nt.to_string() });
            }
        }
    }

    let typing = if design.has("untyped") {
        provenance.retain(|k, _| !k.starts_with("typing:"));
        None
    } else {
        Some(typing)
    };
    let desc = LanguageDescription {
        name: design.name.clone(),
        grammar: Grammar::new(design.start.clone(), productions.into_values().collect()),
        formatting,
        typing,
        evaluation,
        provenance,
    };
    let report = validate_description(&desc);
    if report.is_empty() {
        Ok(desc)
    } else {
        Err(CompileError::Invalid { report })
    }
}

pub fn validate_description(desc: &LanguageDescription) -> ValidationReport {
    let mut report = ValidationReport::default();
    let g = &desc.grammar;
    for (subject, code) in g.check() {
        report.push(Issue::new(subject, code, "grammar is not well formed"));
    }
    let reachable = g.reachable_labels();

    for p in &g.productions {
        let key = format!("production:{}/{}", p.lhs, p.label);
        if !desc.provenance.contains_key(&key) {
            report.push(Issue::new(&p.label, "missing-provenance", format!("no origin recorded for {key}")));
        }
    }
    for label in g.labels() {
        let p = g.production_by_label(label).expect("label comes from the grammar");
        match desc.formatting.get(label) {
            None => report.push(Issue::new(label, "missing-formatting", "no Box rule")),
            Some(b) => check_box(p, b, &mut report),
        }
        if let Some(t) = &desc.typing {
            match t.get(label) {
                None => report.push(Issue::new(label, "missing-typing", "no typing rule")),
                Some(r) => check_typing(p, r, &mut report),
            }
        }
        match desc.evaluation.get(label) {
            None if reachable.contains(label) => {
                report.push(Issue::new(label, "missing-evaluation", "no evaluation rule"))
            }
            None => {}
            Some(r) => check_eval(p, r, &mut report),
        }
    }

    let mut orphan = |kind: &str, labels: Vec<&String>| {
        for l in labels {
            if g.production_by_label(l).is_none() {
                report.push(Issue::new(l, "orphan-rule", format!("{kind} rule for a label with no production")));
            }
            if !desc.provenance.contains_key(&format!("{kind}:{l}")) {
                report.push(Issue::new(l, "missing-provenance", format!("no origin recorded for {kind}:{l}")));
            }
        }
    };
    orphan("formatting", desc.formatting.keys().collect());
    if let Some(t) = &desc.typing {
        orphan("typing", t.keys().collect());
    }
    orphan("evaluation", desc.evaluation.keys().collect());
    report.finish()
}

fn ref_issue(label: &str, facet: &str, p: &Production, pos: usize, want_ident: bool) -> Option<Issue> {
    let ok = match p.rhs.get(pos) {
        None | Some(Symbol::Literal(_)) => false,
        Some(Symbol::Class(LexClass::Ident)) => true,
        Some(_) => !want_ident,
    };
    (!ok).then(|| {
        let what = if want_ident { "an identifier" } else { "a child" };
        Issue::new(label, "bad-ref", format!("{facet} rule: ${pos} is not {what} of `{p}`"))
    })
}

fn check_box(p: &Production, b: &BoxExpr, report: &mut ValidationReport) {
    for s in b.shape_issues() {
        report.push(Issue::new(&p.label, s, "malformed Box rule"));
    }
    let mut texts = Vec::new();
    let mut refs = Vec::new();
    for leaf in b.leaves() {
        match leaf {
            BoxExpr::Text(t) => texts.push(t.clone()),
            BoxExpr::Ref(i) => {
                if let Some(issue) = ref_issue(&p.label, "formatting", p, *i, false) {
                    report.push(issue);
                }
                refs.push(*i);
            }
            _ => {}
        }
    }
    let literals: Vec<String> = p
        .rhs
        .iter()
        .filter_map(|s| match s {
            Symbol::Literal(l) => Some(l.clone()),
            _ => None,
        })
        .collect();
    if texts != literals || refs != p.child_positions() {
        report.push(Issue::new(
            &p.label,
            "formatting-mismatch",
            "Box rule must mention every literal and child of the production once, in order",
        ));
    }
}

fn check_typing(p: &Production, r: &TypingRule, report: &mut ValidationReport) {
    for j in &r.premises {
        let issue = match j {
            Judgment::TypeOf { child, .. } => ref_issue(&r.label, "typing", p, *child, false),
            Judgment::Lookup { child, .. } | Judgment::Bind { child, .. } => {
                ref_issue(&r.label, "typing", p, *child, true)
            }
            Judgment::Eq { .. } => None,
        };
        report.issues.extend(issue);
    }
    for v in r.unbound_conclusion_vars() {
        report.push(
            Issue::new(&r.label, "unbound-type-variable", format!("type variable `{v}` is not bound by a premise"))
                .with_ids([r.label.clone(), v]),
        );
    }
}

fn check_eval(p: &Production, r: &EvalRule, report: &mut ValidationReport) {
    fn walk(label: &str, p: &Production, ps: &[Premise], report: &mut ValidationReport) {
        for premise in ps {
            let issue = match premise {
                Premise::Eval { target: EvalTarget::Child(i), .. } => {
                    if matches!(p.rhs.get(*i), Some(Symbol::Class(LexClass::Ident))) {
                        Some(Issue::new(label, "bad-ref", format!("evaluation rule: ${i} is an identifier; use get")))
                    } else {
                        ref_issue(label, "evaluation", p, *i, false)
                    }
                }
                Premise::StoreGet { child, .. } | Premise::StoreSet { child, .. } => {
                    ref_issue(label, "evaluation", p, *child, true)
                }
                Premise::If { then, otherwise, .. } => {
                    walk(label, p, then, report);
                    walk(label, p, otherwise, report);
                    None
                }
                _ => None,
            };
            report.issues.extend(issue);
        }
    }
    walk(&r.label, p, &r.premises, report);
    for v in r.undefined_vars() {
        report.push(
            Issue::new(&r.label, "undefined-variable", format!("variable `{v}` is used before it is defined"))
                .with_ids([r.label.clone(), v]),
        );
    }
}

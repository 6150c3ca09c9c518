//! Design sessions: a decision log over a knowledge base and the state
//! derived from it (selection, consequences, violations, advice).
//!
//! Derived state is always recomputed from the whole log, so a session is a
//! pure function of `(kb, log)`.

mod derive;
mod finalize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::knowledge::{ConceptId, ConceptKind, KnowledgeBase, Severity};
use crate::metalang::template;

pub use finalize::{finalize, FinalizeError, LanguageDesign, ResolvedBlock};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    Select { concept: ConceptId },
    Deselect { concept: ConceptId },
    SetParam { concept: ConceptId, param: String, value: String },
    AcceptConsequence { concept: ConceptId },
    /// `slot` is the literal's spelling in the concept's syntax templates.
    RenameToken { concept: ConceptId, slot: String, spelling: String },
}

impl Action {
    pub fn concept(&self) -> &ConceptId {
        match self {
            Action::Select { concept }
            | Action::Deselect { concept }
            | Action::SetParam { concept, .. }
            | Action::AcceptConsequence { concept }
            | Action::RenameToken { concept, .. } => concept,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub seq: u64,
    #[serde(flatten)]
    pub action: Action,
}

impl Decision {
    pub fn new(seq: u64, action: Action) -> Self {
        Decision { seq, action }
    }

    pub fn select(seq: u64, concept: &str) -> Self {
        Decision::new(seq, Action::Select { concept: concept.into() })
    }

    pub fn deselect(seq: u64, concept: &str) -> Self {
        Decision::new(seq, Action::Deselect { concept: concept.into() })
    }

    pub fn accept(seq: u64, concept: &str) -> Self {
        Decision::new(seq, Action::AcceptConsequence { concept: concept.into() })
    }

    pub fn set_param(seq: u64, concept: &str, param: &str, value: &str) -> Self {
        Decision::new(
            seq,
            Action::SetParam { concept: concept.into(), param: param.to_string(), value: value.to_string() },
        )
    }

    pub fn rename_token(seq: u64, concept: &str, slot: &str, spelling: &str) -> Self {
        Decision::new(
            seq,
            Action::RenameToken { concept: concept.into(), slot: slot.to_string(), spelling: spelling.to_string() },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Conflict,
    UnsatisfiedHole,
    UnknownId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub kind: ViolationKind,
    pub members: Vec<ConceptId>,
    pub message: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Conflict => "conflict",
            ViolationKind::UnsatisfiedHole => "unsatisfied-hole",
            ViolationKind::UnknownId => "unknown-id",
        };
        write!(f, "{kind}: {}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct AdviceNote {
    pub id: String,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DesignSession {
    pub kb_ref: String,
    pub log: Vec<Decision>,
    pub selected: BTreeSet<ConceptId>,
    pub params: BTreeMap<ConceptId, BTreeMap<String, String>>,
    /// Literal renames per concept: original spelling to new spelling.
    pub renames: BTreeMap<ConceptId, BTreeMap<String, String>>,
    pub pending: Vec<ConceptId>,
    pub violations: Vec<ConstraintViolation>,
    pub advice_active: Vec<String>,
    pub state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum SessionError {
    #[error("stale sequence number {found}, expected {expected}")]
    StaleSequence { expected: u64, found: u64 },
    #[error("unknown concept `{concept}`")]
    UnknownConcept { concept: ConceptId },
    #[error("`{concept}` has no parameter `{param}`")]
    UnknownParameter { concept: ConceptId, param: String },
    #[error("`{value}` is not an allowed value of `{concept}.{param}` (allowed: {})", allowed.join(", "))]
    UnknownParamValue { concept: ConceptId, param: String, value: String, allowed: Vec<String> },
    #[error("`{concept}` has no literal token `{slot}`")]
    UnknownTokenSlot { concept: ConceptId, slot: String },
    #[error("`{spelling}` is not a valid token spelling")]
    InvalidSpelling { spelling: String },
}

/// What changed with one decision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SessionDelta {
    pub newly_pending: Vec<ConceptId>,
    pub newly_violated: Vec<ConstraintViolation>,
    pub newly_advised: Vec<AdviceNote>,
    pub cleared: Cleared,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Cleared {
    pub pending: Vec<ConceptId>,
    pub violations: Vec<ConstraintViolation>,
    pub advice: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SessionUpdate {
    pub session: DesignSession,
    pub delta: SessionDelta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiagnosticsReport {
    pub violations: Vec<ConstraintViolation>,
    pub pending: Vec<ConceptId>,
    pub advice: Vec<AdviceNote>,
    /// Selected concepts grouped by kind name.
    pub selected: BTreeMap<String, Vec<ConceptId>>,
}

impl DiagnosticsReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.pending.is_empty()
    }

    pub fn has_warnings(&self) -> bool {
        self.advice.iter().any(|a| a.severity == Severity::Warning)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("decision {seq}: {error}")]
pub struct ReplayError {
    pub seq: u64,
    pub error: SessionError,
}

pub fn open_session(kb: &KnowledgeBase) -> DesignSession {
    derive::derive(kb, kb.content_hash(), Vec::new())
}

/// Applies one decision. `kb` must be the knowledge base the session was
/// opened on (its hash is `session.kb_ref`).
pub fn apply_decision(
    kb: &KnowledgeBase,
    session: &DesignSession,
    decision: Decision,
) -> Result<SessionUpdate, SessionError> {
    let expected = session.log.len() as u64 + 1;
    if decision.seq != expected {
        return Err(SessionError::StaleSequence { expected, found: decision.seq });
    }
    check_action(kb, &decision.action)?;
    let mut log = session.log.clone();
    log.push(decision);
    let next = derive::derive(kb, session.kb_ref.clone(), log);
    let delta = delta(kb, session, &next);
    Ok(SessionUpdate { session: next, delta })
}

pub fn replay(kb: &KnowledgeBase, log: &[Decision]) -> Result<DesignSession, ReplayError> {
    let mut session = open_session(kb);
    for d in log {
        let seq = d.seq;
        session = apply_decision(kb, &session, d.clone()).map_err(|error| ReplayError { seq, error })?.session;
    }
    Ok(session)
}

pub fn diagnostics(kb: &KnowledgeBase, session: &DesignSession) -> DiagnosticsReport {
    let mut selected: BTreeMap<String, Vec<ConceptId>> = BTreeMap::new();
    for id in &session.selected {
        let kind = kb.concept(id.as_str()).map(|c| c.kind.name()).unwrap_or("unknown");
        selected.entry(kind.to_string()).or_default().push(id.clone());
    }
    DiagnosticsReport {
        violations: session.violations.clone(),
        pending: session.pending.clone(),
        advice: session.advice_active.iter().filter_map(|id| advice_note(kb, id)).collect(),
        selected,
    }
}

fn advice_note(kb: &KnowledgeBase, id: &str) -> Option<AdviceNote> {
    kb.advice
        .iter()
        .find(|r| r.id == id)
        .map(|r| AdviceNote { id: r.id.clone(), message: r.message.clone(), severity: r.severity })
}

fn check_action(kb: &KnowledgeBase, action: &Action) -> Result<(), SessionError> {
    let id = action.concept();
    let Some(concept) = kb.concept(id.as_str()) else {
        return Err(SessionError::UnknownConcept { concept: id.clone() });
    };
    match action {
        Action::SetParam { param, value, .. } => {
            let Some(decl) = concept.parameter(param) else {
                return Err(SessionError::UnknownParameter { concept: id.clone(), param: param.clone() });
            };
            if !decl.allowed.contains(value) {
                return Err(SessionError::UnknownParamValue {
                    concept: id.clone(),
                    param: param.clone(),
                    value: value.clone(),
                    allowed: decl.allowed.clone(),
                });
            }
        }
        Action::RenameToken { slot, spelling, .. } => {
            let slots = token_slots(concept.facets.as_ref().map(|f| f.syntax.as_slice()).unwrap_or(&[]));
            if concept.kind != ConceptKind::BuildingBlock || !slots.contains(slot) {
                return Err(SessionError::UnknownTokenSlot { concept: id.clone(), slot: slot.clone() });
            }
            if spelling.is_empty() || spelling.chars().any(|c| c.is_whitespace() || c == '"' || c == '$' || c == '#')
            {
                return Err(SessionError::InvalidSpelling { spelling: spelling.clone() });
            }
        }
        _ => {}
    }
    Ok(())
}

/// Renamable literals: those of the syntax templates that do not mention a parameter.
fn token_slots(syntax: &[String]) -> BTreeSet<String> {
    syntax
        .iter()
        .filter_map(|l| template::split_guard(l).ok().map(|(_, body)| body))
        .flat_map(template::literals)
        .filter(|s| !s.contains('$'))
        .collect()
}

fn delta(kb: &KnowledgeBase, before: &DesignSession, after: &DesignSession) -> SessionDelta {
    let newly_pending = after.pending.iter().filter(|c| !before.pending.contains(c)).cloned().collect();
    let newly_violated = after.violations.iter().filter(|v| !before.violations.contains(v)).cloned().collect();
    let newly_advised = after
        .advice_active
        .iter()
        .filter(|a| !before.advice_active.contains(a))
        .filter_map(|a| advice_note(kb, a))
        .collect();
    let cleared = Cleared {
        pending: before.pending.iter().filter(|c| !after.pending.contains(c)).cloned().collect(),
        violations: before.violations.iter().filter(|v| !after.violations.contains(v)).cloned().collect(),
        advice: before.advice_active.iter().filter(|a| !after.advice_active.contains(a)).cloned().collect(),
    };
    SessionDelta { newly_pending, newly_violated, newly_advised, cleared }
}

#[cfg(test)]
mod tests;

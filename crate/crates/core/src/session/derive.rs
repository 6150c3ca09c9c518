use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use super::{Action, ConstraintViolation, Decision, DesignSession, ViolationKind};
use crate::canonical;
use crate::knowledge::{ConceptId, ConceptKind, KnowledgeBase};

/// Selection after folding the log, in order of each concept's latest select.
pub(super) fn selection_order(log: &[Decision]) -> Vec<ConceptId> {
    let mut order: Vec<ConceptId> = Vec::new();
    for d in log {
        match &d.action {
            Action::Select { concept } | Action::AcceptConsequence { concept } => {
                order.retain(|c| c != concept);
                order.push(concept.clone());
            }
            Action::Deselect { concept } => order.retain(|c| c != concept),
            _ => {}
        }
    }
    order
}

/// Breadth-first requires-closure from `sources` (in order), neighbors
/// visited lexicographically. Returns every reached concept in visit order.
pub(crate) fn closure_order(kb: &KnowledgeBase, sources: &[ConceptId]) -> Vec<ConceptId> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    let mut out = Vec::new();
    for s in sources {
        if seen.insert(s.as_str()) {
            queue.push_back(s.as_str());
        }
    }
    while let Some(c) = queue.pop_front() {
        out.push(ConceptId::new(c));
        for next in kb.requires_of(c) {
            if seen.insert(next.as_str()) {
                queue.push_back(next.as_str());
            }
        }
    }
    out
}

/// Conflict and hole violations for `selected`, treating holes as covered
/// by any owner in `cover`.
pub(crate) fn violations(
    kb: &KnowledgeBase,
    selected: &BTreeSet<ConceptId>,
    cover: &BTreeSet<ConceptId>,
) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let mut owners_by_nt: BTreeMap<String, Vec<&ConceptId>> = BTreeMap::new();
    for (id, c) in &kb.concepts {
        if c.kind == ConceptKind::BuildingBlock {
            for nt in c.owned_nonterminals() {
                owners_by_nt.entry(nt).or_default().push(id);
            }
        }
    }
    for (a, b) in kb.conflict_pairs() {
        if selected.contains(&a) && selected.contains(&b) {
            out.push(ConstraintViolation {
                kind: ViolationKind::Conflict,
                message: format!("`{a}` conflicts with `{b}`"),
                members: vec![a, b],
            });
        }
    }
    for id in selected {
        let Some(concept) = kb.concept(id.as_str()) else { continue };
        if concept.kind != ConceptKind::BuildingBlock {
            continue;
        }
        for hole in concept.holes() {
            let owners = owners_by_nt.get(hole).cloned().unwrap_or_default();
            if owners.iter().any(|o| cover.contains(*o)) {
                continue;
            }
            // Name the owners this concept itself asks for, if any.
            let reach: BTreeSet<ConceptId> = closure_order(kb, std::slice::from_ref(id)).into_iter().collect();
            let preferred: Vec<ConceptId> = owners.iter().filter(|o| reach.contains(**o)).map(|o| (*o).clone()).collect();
            let candidates = if preferred.is_empty() { owners.into_iter().cloned().collect() } else { preferred };
            let mut members = vec![id.clone()];
            members.extend(candidates);
            out.push(ConstraintViolation {
                kind: ViolationKind::UnsatisfiedHole,
                message: format!("`{id}` needs a definition of `{hole}` ({})", names(&members[1..])),
                members,
            });
        }
    }
    out.sort();
    out
}

fn names(ids: &[ConceptId]) -> String {
    if ids.is_empty() {
        return "no building block defines it".to_string();
    }
    let list: Vec<String> = ids.iter().map(|i| format!("`{i}`")).collect();
    format!("provided by {}", list.join(", "))
}

#[derive(Serialize)]
struct HashedState<'a> {
    selected: &'a BTreeSet<ConceptId>,
    params: &'a BTreeMap<ConceptId, BTreeMap<String, String>>,
    renames: &'a BTreeMap<ConceptId, BTreeMap<String, String>>,
    pending: &'a [ConceptId],
    violations: &'a [ConstraintViolation],
}

pub(super) fn derive(kb: &KnowledgeBase, kb_ref: String, log: Vec<Decision>) -> DesignSession {
    let order = selection_order(&log);
    let selected: BTreeSet<ConceptId> = order.iter().cloned().collect();
    let mut params: BTreeMap<ConceptId, BTreeMap<String, String>> = BTreeMap::new();
    let mut renames: BTreeMap<ConceptId, BTreeMap<String, String>> = BTreeMap::new();
    for d in &log {
        match &d.action {
            Action::SetParam { concept, param, value } => {
                params.entry(concept.clone()).or_default().insert(param.clone(), value.clone());
            }
            Action::RenameToken { concept, slot, spelling } => {
                renames.entry(concept.clone()).or_default().insert(slot.clone(), spelling.clone());
            }
            _ => {}
        }
    }
    let pending: Vec<ConceptId> =
        closure_order(kb, &order).into_iter().filter(|c| !selected.contains(c)).collect();
    let cover: BTreeSet<ConceptId> = selected.iter().chain(&pending).cloned().collect();
    let violations = violations(kb, &selected, &cover);
    let mut advice_active: Vec<String> =
        kb.advice.iter().filter(|r| r.condition.holds(&selected)).map(|r| r.id.clone()).collect();
    advice_active.sort();
    advice_active.dedup();
    let state_hash = canonical::content_hash(&HashedState {
        selected: &selected,
        params: &params,
        renames: &renames,
        pending: &pending,
        violations: &violations,
    });
    DesignSession { kb_ref, log, selected, params, renames, pending, violations, advice_active, state_hash }
}

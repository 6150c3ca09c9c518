use super::*;
use crate::knowledge::{FacetBundle, LanguageConcept, Relation, CONFLICTS, REQUIRES};

fn concept(kind: ConceptKind, syntax: &[&str]) -> LanguageConcept {
    let facets = (kind == ConceptKind::BuildingBlock).then(|| FacetBundle {
        syntax: syntax.iter().map(|s| s.to_string()).collect(),
        ..FacetBundle::default()
    });
    LanguageConcept { kind, description: String::new(), facets, parameters: Vec::new() }
}

/// top requires mid-b and mid-a; both require leaf; x conflicts with y.
fn kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::empty();
    for id in ["mid-a", "mid-b", "leaf", "x", "y"] {
        kb.concepts.insert(id.into(), concept(ConceptKind::Attribute, &[]));
    }
    kb.concepts.insert("top".into(), concept(ConceptKind::BuildingBlock, &[r#"Top: S -> "go" ";""#]));
    kb.relations.push(Relation::binary(
        REQUIRES,
        [("top", "mid-b"), ("top", "mid-a"), ("mid-a", "leaf"), ("mid-b", "leaf")],
    ));
    kb.relations.push(Relation::binary(CONFLICTS, [("x", "y")]));
    kb
}

fn step(kb: &KnowledgeBase, s: &DesignSession, action: Action) -> SessionUpdate {
    apply_decision(kb, s, Decision::new(s.log.len() as u64 + 1, action)).unwrap()
}

fn sel(id: &str) -> Action {
    Action::Select { concept: id.into() }
}

#[test]
fn pending_is_breadth_first_and_lexicographic() {
    let kb = kb();
    let s = step(&kb, &open_session(&kb), sel("top")).session;
    let p: Vec<&str> = s.pending.iter().map(ConceptId::as_str).collect();
    assert_eq!(p, ["mid-a", "mid-b", "leaf"]);
}

#[test]
fn accepting_clears_pending_in_the_delta() {
    let kb = kb();
    let s = step(&kb, &open_session(&kb), sel("top")).session;
    let up = step(&kb, &s, Action::AcceptConsequence { concept: "mid-a".into() });
    assert_eq!(up.delta.cleared.pending, vec![ConceptId::from("mid-a")]);
    assert!(up.delta.newly_pending.is_empty());
}

#[test]
fn deselecting_a_conflict_member_clears_the_violation() {
    let kb = kb();
    let s = step(&kb, &open_session(&kb), sel("x")).session;
    let s = step(&kb, &s, sel("y"));
    assert_eq!(s.delta.newly_violated.len(), 1);
    let up = step(&kb, &s.session, Action::Deselect { concept: "y".into() });
    assert_eq!(up.delta.cleared.violations.len(), 1);
    assert!(up.session.violations.is_empty());
}

#[test]
fn renames_are_checked_against_template_literals() {
    let kb = kb();
    let s = open_session(&kb);
    let rename = |slot: &str, spelling: &str| Decision::rename_token(1, "top", slot, spelling);
    assert!(apply_decision(&kb, &s, rename("go", "run")).is_ok());
    assert_eq!(
        apply_decision(&kb, &s, rename("stop", "run")).unwrap_err(),
        SessionError::UnknownTokenSlot { concept: "top".into(), slot: "stop".into() }
    );
    assert_eq!(
        apply_decision(&kb, &s, rename("go", "r n")).unwrap_err(),
        SessionError::InvalidSpelling { spelling: "r n".into() }
    );
    assert!(matches!(
        apply_decision(&kb, &s, Decision::rename_token(1, "x", "go", "run")),
        Err(SessionError::UnknownTokenSlot { .. })
    ));
}

#[test]
fn unknown_parameter_is_named() {
    let kb = kb();
    let err = apply_decision(&kb, &open_session(&kb), Decision::set_param(1, "top", "sep", ",")).unwrap_err();
    assert_eq!(err, SessionError::UnknownParameter { concept: "top".into(), param: "sep".into() });
}

#[test]
fn errors_serialize_with_their_tag() {
    let e = SessionError::StaleSequence { expected: 2, found: 5 };
    let json = serde_json::to_value(&e).unwrap();
    assert_eq!(json["error"], "stale-sequence");
    assert_eq!(json["found"], 5);
}

use super::*;

fn concept(kind: ConceptKind, facets: Option<FacetBundle>) -> LanguageConcept {
    LanguageConcept { kind, description: String::new(), facets, parameters: Vec::new() }
}

fn tiny() -> KnowledgeBase {
    let mut kb = KnowledgeBase::empty();
    kb.concepts.insert("a".into(), concept(ConceptKind::Attribute, None));
    kb.concepts.insert("b".into(), concept(ConceptKind::Attribute, None));
    kb.concepts.insert(
        "blk".into(),
        concept(
            ConceptKind::BuildingBlock,
            Some(FacetBundle {
                syntax: vec![r#"Skip: Stmt -> "skip""#.into()],
                formatting: vec![r#"Skip = "skip""#.into()],
                ..FacetBundle::default()
            }),
        ),
    );
    kb.relations.push(Relation::binary(REQUIRES, [("blk", "a")]));
    kb
}

fn codes(report: &ValidationReport) -> Vec<&str> {
    report.issues.iter().map(|i| i.code.as_str()).collect()
}

#[test]
fn empty_document_loads() {
    let kb = load_kb(r#"{"version":"lda-kb/1","concepts":{}}"#).unwrap();
    assert_eq!(kb.concepts.len(), 0);
    assert_eq!(kb.relations.len(), 0);
}

#[test]
fn malformed_document_reports_position() {
    let err = load_kb("{\n  \"version\": \"lda-kb/1\",\n  \"concepts\": [\n").unwrap_err();
    match err {
        KbError::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn reflexive_conflict_names_the_concept() {
    let mut kb = tiny();
    kb.relations.push(Relation::binary(CONFLICTS, [("a", "a")]));
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["reflexive-pair"]);
    assert_eq!(report.issues[0].ids, vec!["a"]);
    let err = load_kb(&save_kb(&kb)).unwrap_err();
    assert!(matches!(err, KbError::Validation(_)));
}

#[test]
fn undeclared_parameter_is_one_breach() {
    let mut kb = tiny();
    kb.concepts.get_mut("blk").unwrap().facets.as_mut().unwrap().formatting =
        vec![r#"Skip = H hs=1 [ "skip" ] # $sep"#.into()];
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["undeclared-parameter"]);
    assert_eq!(report.issues[0].ids, vec!["blk", "sep"]);
}

#[test]
fn missing_relation_target_is_named() {
    let mut kb = tiny();
    kb.relations[0].pairs.insert(("blk".into(), "ghost".into()));
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["unknown-id"]);
    assert_eq!(report.issues[0].ids, vec!["ghost"]);
}

#[test]
fn facets_only_on_building_blocks() {
    let mut kb = tiny();
    kb.concepts.get_mut("a").unwrap().facets = Some(FacetBundle::default());
    kb.concepts.get_mut("blk").unwrap().facets = None;
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["unexpected-facets", "missing-facets"]);
}

#[test]
fn bad_default_and_bad_guard_value() {
    let mut kb = tiny();
    let blk = kb.concepts.get_mut("blk").unwrap();
    blk.parameters.push(ParameterDecl { name: "kw".into(), allowed: vec!["skip".into()], default: "pass".into() });
    blk.facets.as_mut().unwrap().syntax.push(r#"[$kw: nop] Nop: Stmt -> "$kw""#.into());
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["default-not-allowed", "bad-guard"]);
}

#[test]
fn undeclared_hole_is_reported() {
    let mut kb = tiny();
    kb.concepts.get_mut("blk").unwrap().facets.as_mut().unwrap().syntax.push(r#"Say: Stmt -> "say" Expr"#.into());
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["undeclared-hole"]);
    kb.concepts.get_mut("blk").unwrap().facets.as_mut().unwrap().holes.push("Expr".into());
    assert!(validate_kb(&kb).is_empty());
}

#[test]
fn facet_parse_errors_carry_the_path() {
    let mut kb = tiny();
    kb.concepts.get_mut("blk").unwrap().facets.as_mut().unwrap().typing.push("Skip: => nat".into());
    let report = validate_kb(&kb);
    assert_eq!(codes(&report), vec!["facet-parse-error"]);
    assert_eq!(report.issues[0].subject, "concepts.blk.facets.typing[0]");
}

#[test]
fn save_is_canonical_and_round_trips() {
    let kb = tiny();
    let text = save_kb(&kb);
    assert!(text.ends_with("}\n"));
    assert!(!text.trim_end().contains('\n'));
    let back = load_kb(&text).unwrap();
    assert_eq!(back, kb);
    assert_eq!(save_kb(&back), text);
}

#[test]
fn owners_include_declared_and_defined_nonterminals() {
    let kb = tiny();
    assert_eq!(kb.owners_of("Stmt"), vec![&ConceptId::from("blk")]);
    assert!(kb.owners_of("Expr").is_empty());
}

#[test]
fn queries_combine_as_sets() {
    let kb = tiny();
    let attrs = query_kb(&kb, &Query::ByKind(ConceptKind::Attribute)).unwrap();
    assert_eq!(attrs, vec![ConceptId::from("a"), ConceptId::from("b")]);
    let req = query_kb(&kb, &Query::related("blk", REQUIRES, Direction::Outgoing)).unwrap();
    assert_eq!(req, vec![ConceptId::from("a")]);
    let back = query_kb(&kb, &Query::related("a", REQUIRES, Direction::Incoming)).unwrap();
    assert_eq!(back, vec![ConceptId::from("blk")]);
    let both = query_kb(&kb, &Query::and(Query::ByKind(ConceptKind::Attribute), Query::ByText("zzz".into()))).unwrap();
    assert!(both.is_empty());
    let err = query_kb(&kb, &Query::related("a", "implements", Direction::Outgoing)).unwrap_err();
    assert_eq!(err, QueryError::UnknownRelation { relation: "implements".into() });
}

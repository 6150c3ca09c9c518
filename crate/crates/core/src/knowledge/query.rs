//! The design language: browse the knowledge base with small queries.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ConceptId, ConceptKind, KnowledgeBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Outgoing,
    Incoming,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Query {
    ByKind(ConceptKind),
    /// Case-insensitive substring of the id or the description.
    ByText(String),
    RelatedTo { id: ConceptId, relation: String, direction: Direction },
    And(Box<Query>, Box<Query>),
    Or(Box<Query>, Box<Query>),
}

impl Query {
    pub fn and(a: Query, b: Query) -> Query {
        Query::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Query, b: Query) -> Query {
        Query::Or(Box::new(a), Box::new(b))
    }

    pub fn related(id: &str, relation: &str, direction: Direction) -> Query {
        Query::RelatedTo { id: id.into(), relation: relation.to_string(), direction }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum QueryError {
    #[error("unknown relation `{relation}`")]
    UnknownRelation { relation: String },
}

/// Ids satisfying `q`, sorted.
pub fn query_kb(kb: &KnowledgeBase, q: &Query) -> Result<Vec<ConceptId>, QueryError> {
    Ok(eval(kb, q)?.into_iter().collect())
}

fn eval(kb: &KnowledgeBase, q: &Query) -> Result<BTreeSet<ConceptId>, QueryError> {
    Ok(match q {
        Query::ByKind(kind) => kb.concepts.iter().filter(|(_, c)| c.kind == *kind).map(|(id, _)| id.clone()).collect(),
        Query::ByText(needle) => {
            let needle = needle.to_lowercase();
            kb.concepts
                .iter()
                .filter(|(id, c)| {
                    id.as_str().to_lowercase().contains(&needle) || c.description.to_lowercase().contains(&needle)
                })
                .map(|(id, _)| id.clone())
                .collect()
        }
        Query::RelatedTo { id, relation, direction } => {
            let rel = kb.relation(relation).ok_or_else(|| QueryError::UnknownRelation { relation: relation.clone() })?;
            let mut out = BTreeSet::new();
            for (a, b) in &rel.pairs {
                let forward = match direction {
                    Direction::Outgoing => (a, b),
                    Direction::Incoming => (b, a),
                };
                if forward.0 == id {
                    out.insert(forward.1.clone());
                }
                if rel.is_symmetric() && forward.1 == id {
                    out.insert(forward.0.clone());
                }
            }
            out
        }
        Query::And(a, b) => {
            let (a, b) = (eval(kb, a)?, eval(kb, b)?);
            a.intersection(&b).cloned().collect()
        }
        Query::Or(a, b) => {
            let (a, b) = (eval(kb, a)?, eval(kb, b)?);
            a.union(&b).cloned().collect()
        }
    })
}

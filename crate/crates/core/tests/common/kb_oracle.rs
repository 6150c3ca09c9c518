//! Relation tables read straight from the KB document (raw JSON), with
//! naive fixpoint closure and pair scans. Shares no code with the session
//! module.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

pub struct Tables {
    pub ids: Vec<String>,
    pub requires: Vec<(String, String)>,
    pub conflicts: Vec<(String, String)>,
    /// Building block id to the hole nonterminals it declares.
    pub holes: BTreeMap<String, Vec<String>>,
    /// Nonterminal to the building blocks whose syntax lines define it.
    pub owners: BTreeMap<String, BTreeSet<String>>,
}

fn pairs(doc: &Value, name: &str) -> Vec<(String, String)> {
    doc["relations"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|r| r["name"] == name)
        .flat_map(|r| r["pairs"].as_array().cloned().unwrap_or_default())
        .map(|p| (p[0].as_str().unwrap().to_string(), p[1].as_str().unwrap().to_string()))
        .collect()
}

/// `[guard] Label: Lhs -> ...` gives `Lhs`.
fn lhs_of(line: &str) -> Option<String> {
    let body = match line.trim_start().strip_prefix('[') {
        Some(rest) => rest.split_once(']')?.1,
        None => line,
    };
    let (_, after) = body.split_once(':')?;
    let (lhs, _) = after.split_once("->")?;
    Some(lhs.trim().to_string())
}

pub fn tables(doc: &Value) -> Tables {
    let concepts = doc["concepts"].as_object().expect("concepts object");
    let mut holes = BTreeMap::new();
    let mut owners: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (id, c) in concepts {
        let Some(f) = c.get("facets") else { continue };
        let strings = |key: &str| -> Vec<String> {
            f[key].as_array().into_iter().flatten().filter_map(|v| v.as_str().map(String::from)).collect()
        };
        holes.insert(id.clone(), strings("holes"));
        for nt in strings("syntax").iter().filter_map(|l| lhs_of(l)).chain(strings("nonterminals")) {
            owners.entry(nt).or_default().insert(id.clone());
        }
    }
    Tables {
        ids: concepts.keys().cloned().collect(),
        requires: pairs(doc, "requires"),
        conflicts: pairs(doc, "conflicts"),
        holes,
        owners,
    }
}

impl Tables {
    /// Least superset of `seeds` closed under requires.
    pub fn closure(&self, seeds: &BTreeSet<String>) -> BTreeSet<String> {
        let mut out = seeds.clone();
        loop {
            let before = out.len();
            for (a, b) in &self.requires {
                if out.contains(a) {
                    out.insert(b.clone());
                }
            }
            if out.len() == before {
                return out;
            }
        }
    }

    /// Every conflicting pair inside `selected`, as sorted pairs.
    pub fn conflicts_within(&self, selected: &BTreeSet<String>) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for a in selected {
            for b in selected {
                if a < b && self.conflicts.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a)) {
                    out.insert((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    /// Outgoing requires targets of `id`, sorted.
    pub fn requires_of(&self, id: &str) -> Vec<String> {
        let mut v: Vec<String> = self.requires.iter().filter(|(a, _)| a == id).map(|(_, b)| b.clone()).collect();
        v.sort();
        v
    }
}

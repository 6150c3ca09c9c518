//! Exact-consistency inference. A junction between two neighbouring
//! components is usable by an H only if every instance puts them on one
//! line with the same gap, and by a V only if every instance breaks the
//! line there with the same blank-line count and the same column offset
//! from the V's first component. Among the boxes built from usable
//! junctions, the cheapest by [`cost`] is chosen; the search is an exact
//! dynamic program over component ranges.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{ComponentGeometry, InstanceId, LayoutObservation};
use crate::metalang::BoxExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictDimension {
    /// Whether the boundary breaks the line, and by how many lines.
    LineStructure,
    /// Columns between components sharing a line.
    Gap,
    /// Column of a component starting a new line, relative to the node.
    Indent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: InstanceId,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceConflict {
    pub label: String,
    pub dimension: ConflictDimension,
    /// Rhs position of the component after the disputed boundary.
    pub boundary: usize,
    /// One instance per distinct observed value.
    pub witnesses: Vec<Witness>,
}

impl std::fmt::Display for InferenceConflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dim = match self.dimension {
            ConflictDimension::LineStructure => "line structure",
            ConflictDimension::Gap => "gap",
            ConflictDimension::Indent => "indent",
        };
        write!(f, "{}: examples disagree on the {dim} before component ${}:", self.label, self.boundary)?;
        let parts: Vec<String> =
            self.witnesses.iter().map(|w| format!("{}@{} has {}", w.instance.example, w.instance.span.start, w.value)).collect();
        write!(f, " {}", parts.join(", "))
    }
}

/// Total order on candidate rules: operators, then V count (H before V),
/// then I count, then the canonical text.
pub fn cost(b: &BoxExpr) -> (usize, usize, usize, String) {
    (b.operator_count(), b.count_v(), b.count_i(), b.to_string())
}

struct Table<'a> {
    rows: Vec<&'a [ComponentGeometry]>,
    n: usize,
    memo: HashMap<(usize, usize), Option<BoxExpr>>,
}

impl Table<'_> {
    /// The common gap at the boundary before component `k`, if every
    /// instance keeps both components on one line.
    fn h_gap(&self, k: usize) -> Option<u32> {
        let mut out = None;
        for r in &self.rows {
            if r[k].line != r[k - 1].end_line {
                return None;
            }
            let g = r[k].column.checked_sub(r[k - 1].end_column)?;
            if out.is_some_and(|o| o != g) {
                return None;
            }
            out = Some(g);
        }
        out
    }

    /// The common number of blank lines at the boundary before `k`.
    fn v_blank(&self, k: usize) -> Option<u32> {
        let mut out = None;
        for r in &self.rows {
            let d = r[k].line.checked_sub(r[k - 1].end_line)?.checked_sub(1)?;
            if out.is_some_and(|o| o != d) {
                return None;
            }
            out = Some(d);
        }
        out
    }

    /// The common column of `k` relative to component `i`.
    fn offset(&self, i: usize, k: usize) -> Option<u32> {
        let mut out = None;
        for r in &self.rows {
            let d = r[k].column.checked_sub(r[i].column)?;
            if out.is_some_and(|o| o != d) {
                return None;
            }
            out = Some(d);
        }
        out
    }

    fn leaf(&self, k: usize) -> BoxExpr {
        let c = &self.rows[0][k];
        match &c.literal {
            Some(l) => BoxExpr::text(l.clone()),
            None => BoxExpr::Ref(c.position),
        }
    }

    fn best(&mut self, i: usize, j: usize) -> Option<BoxExpr> {
        if j == i + 1 {
            return Some(self.leaf(i));
        }
        if let Some(b) = self.memo.get(&(i, j)) {
            return b.clone();
        }
        let mut cands = Vec::new();
        let gaps: BTreeSet<u32> = (i + 1..j).filter_map(|k| self.h_gap(k)).collect();
        for hs in gaps {
            cands.extend(self.sequence(i, j, |t, k| (t.h_gap(k) == Some(hs)).then_some(None)).map(|c| BoxExpr::h(hs, c)));
        }
        let blanks: BTreeSet<u32> = (i + 1..j).filter_map(|k| self.v_blank(k)).collect();
        let mut indents: BTreeSet<u32> = (i + 1..j).filter_map(|k| self.offset(i, k)).collect();
        indents.insert(0);
        for vs in blanks {
            for &is in &indents {
                let junction = |t: &Table, k: usize| {
                    if t.v_blank(k) != Some(vs) {
                        return None;
                    }
                    let d = t.offset(i, k)?.checked_sub(is)?;
                    Some((d > 0).then_some(d))
                };
                cands.extend(self.sequence(i, j, junction).map(|c| BoxExpr::v(vs, is, c)));
            }
        }
        let b = cands.into_iter().min_by_key(cost);
        self.memo.insert((i, j), b.clone());
        b
    }

    /// Cheapest split of `[i, j)` into at least two segments whose
    /// junctions `junction` accepts. `junction` returns the I shift of the
    /// segment starting there (`Some(None)` for none).
    fn sequence(
        &mut self,
        i: usize,
        j: usize,
        junction: impl Fn(&Table, usize) -> Option<Option<u32>>,
    ) -> Option<Vec<BoxExpr>> {
        let key = |segs: &[BoxExpr]| {
            let mut k = (0, 0, 0, String::new());
            for s in segs {
                let c = cost(s);
                k.0 += c.0;
                k.1 += c.1;
                k.2 += c.2;
                k.3.push(' ');
                k.3.push_str(&c.3);
            }
            k
        };
        let wrap = |b: BoxExpr, shift: Option<u32>| match shift {
            Some(d) => BoxExpr::i(d, b),
            None => b,
        };
        // prefix[k]: best segments covering [i, k), for i < k < j.
        let mut prefix: Vec<Option<Vec<BoxExpr>>> = vec![None; j + 1];
        for k in i + 1..=j {
            let mut options: Vec<Vec<BoxExpr>> = Vec::new();
            if k < j {
                if let Some(b) = self.best(i, k) {
                    options.push(vec![b]);
                }
            }
            for m in i + 1..k {
                let Some(shift) = junction(self, m) else { continue };
                let Some(head) = prefix[m].clone() else { continue };
                let Some(b) = self.best(m, k) else { continue };
                let mut segs = head;
                segs.push(wrap(b, shift));
                options.push(segs);
            }
            prefix[k] = options.into_iter().min_by_key(|s| key(s));
        }
        prefix[j].take()
    }
}

/// Reads one dimension of the boundary before component `k`.
type Measure<'a> = dyn Fn(&LayoutObservation, usize) -> Option<u32> + 'a;

/// One rule per label whose instances agree, or every conflict found.
pub fn infer_rules(observations: &[LayoutObservation]) -> Result<BTreeMap<String, BoxExpr>, Vec<InferenceConflict>> {
    let mut rules = BTreeMap::new();
    let mut conflicts_out = Vec::new();
    for (label, group) in by_label(observations) {
        match infer_label(&group) {
            Some(b) => {
                rules.insert(label.to_string(), b);
            }
            None => conflicts_out.push(explain(label, &group)),
        }
    }
    if conflicts_out.is_empty() {
        Ok(rules)
    } else {
        Err(conflicts_out)
    }
}

/// The conflicts `infer_rules` would report; empty when inference succeeds.
pub fn conflicts(observations: &[LayoutObservation]) -> Vec<InferenceConflict> {
    infer_rules(observations).err().unwrap_or_default()
}

fn by_label(observations: &[LayoutObservation]) -> BTreeMap<&str, Vec<&LayoutObservation>> {
    let mut groups: BTreeMap<&str, Vec<&LayoutObservation>> = BTreeMap::new();
    for o in observations {
        groups.entry(&o.label).or_default().push(o);
    }
    for g in groups.values_mut() {
        g.sort_by(|a, b| a.instance.cmp(&b.instance));
    }
    groups
}

fn infer_label(group: &[&LayoutObservation]) -> Option<BoxExpr> {
    let rows: Vec<&[ComponentGeometry]> = group.iter().map(|o| o.components.as_slice()).collect();
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut t = Table { rows, n, memo: HashMap::new() };
    t.best(0, t.n)
}

/// Names the first disputed boundary, checking line structure before gaps
/// before indents.
fn explain(label: &str, group: &[&LayoutObservation]) -> InferenceConflict {
    let n = group[0].components.len();
    let line_delta = |o: &LayoutObservation, k: usize| o.components[k].line - o.components[k - 1].end_line;
    let dims: [(ConflictDimension, &Measure); 3] = [
        (ConflictDimension::LineStructure, &|o, k| Some(line_delta(o, k))),
        (ConflictDimension::Gap, &|o, k| {
            (line_delta(o, k) == 0).then(|| o.components[k].column - o.components[k - 1].end_column)
        }),
        (ConflictDimension::Indent, &|o, k| (line_delta(o, k) > 0).then_some(o.components[k].column)),
    ];
    for (dimension, value) in dims {
        for k in 1..n {
            let mut witnesses: Vec<Witness> = Vec::new();
            for o in group {
                let Some(v) = value(o, k) else { continue };
                if !witnesses.iter().any(|w| w.value == v) {
                    witnesses.push(Witness { instance: o.instance.clone(), value: v });
                }
            }
            if witnesses.len() > 1 {
                return InferenceConflict { label: label.to_string(), dimension, boundary: group[0].components[k].position, witnesses };
            }
        }
    }
    // Every boundary agrees, yet no box fits: report the first instance.
    InferenceConflict {
        label: label.to_string(),
        dimension: ConflictDimension::LineStructure,
        boundary: group[0].components.first().map_or(0, |c| c.position),
        witnesses: group.iter().take(1).map(|o| Witness { instance: o.instance.clone(), value: 0 }).collect(),
    }
}

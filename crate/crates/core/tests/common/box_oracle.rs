//! A reference Box renderer working on absolute coordinates, and an
//! exhaustive search for the cheapest box that places a flat row of
//! single-token components exactly where a set of examples has them.

use std::collections::HashMap;

use lda_core::metalang::BoxExpr;

/// Places `b` with its origin at `(line, col)`, recording every text leaf
/// in `out`. Returns the line and column where the box ends.
pub fn place(b: &BoxExpr, line: u32, col: u32, out: &mut Vec<(u32, u32, String)>) -> (u32, u32) {
    match b {
        BoxExpr::Text(s) => {
            out.push((line, col, s.clone()));
            (line, col + s.chars().count() as u32)
        }
        BoxExpr::Ref(_) => panic!("reference renderer needs a substituted box"),
        BoxExpr::I { is, child } => place(child, line, col + is, out),
        BoxExpr::H { hs, children } => {
            let mut at = (line, col);
            for (k, c) in children.iter().enumerate() {
                let start = if k == 0 { at } else { (at.0, at.1 + hs) };
                at = place(c, start.0, start.1, out);
            }
            at
        }
        BoxExpr::V { vs, is, children } => {
            let mut at = (line, col);
            for (k, c) in children.iter().enumerate() {
                let start = if k == 0 { (line, col) } else { (at.0 + 1 + vs, col + is) };
                at = place(c, start.0, start.1, out);
            }
            at
        }
    }
}

/// Text of a placed box: leaves written into a character grid, trailing
/// blanks removed, one final newline.
pub fn render(b: &BoxExpr) -> String {
    let mut leaves = Vec::new();
    let (last, _) = place(b, 0, 0, &mut leaves);
    let mut grid: Vec<Vec<char>> = vec![Vec::new(); last as usize + 1];
    for (l, c, s) in leaves {
        let row = &mut grid[l as usize];
        for (k, ch) in s.chars().enumerate() {
            let at = c as usize + k;
            if row.len() <= at {
                row.resize(at + 1, ' ');
            }
            row[at] = ch;
        }
    }
    let mut out = String::new();
    for row in grid {
        let line: String = row.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Cost order of the dialect: operators, then V count, then I count, then
/// the canonical text.
pub fn cost(b: &BoxExpr) -> (usize, usize, usize, String) {
    fn walk(b: &BoxExpr, acc: &mut (usize, usize, usize)) {
        match b {
            BoxExpr::Text(_) | BoxExpr::Ref(_) => {}
            BoxExpr::H { children, .. } => {
                acc.0 += 1;
                children.iter().for_each(|c| walk(c, acc));
            }
            BoxExpr::V { children, .. } => {
                acc.0 += 1;
                acc.1 += 1;
                children.iter().for_each(|c| walk(c, acc));
            }
            BoxExpr::I { child, .. } => {
                acc.0 += 1;
                acc.2 += 1;
                walk(child, acc);
            }
        }
    }
    let mut acc = (0, 0, 0);
    walk(b, &mut acc);
    (acc.0, acc.1, acc.2, b.to_string())
}

/// One example occurrence: the text of each component and where it starts
/// relative to the node start.
#[derive(Debug, Clone)]
pub struct Instance {
    pub texts: Vec<String>,
    pub pos: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
enum Cand {
    Leaf(usize),
    H(u32, Vec<Cand>),
    V(u32, u32, Vec<Cand>),
    I(u32, Box<Cand>),
}

impl Cand {
    fn to_box(&self, leaf: &dyn Fn(usize) -> BoxExpr) -> BoxExpr {
        match self {
            Cand::Leaf(k) => leaf(*k),
            Cand::H(hs, cs) => BoxExpr::h(*hs, cs.iter().map(|c| c.to_box(leaf)).collect()),
            Cand::V(vs, is, cs) => BoxExpr::v(*vs, *is, cs.iter().map(|c| c.to_box(leaf)).collect()),
            Cand::I(is, c) => BoxExpr::i(*is, c.to_box(leaf)),
        }
    }
}

/// Exhaustive search over boxes whose leaves are the components in order,
/// with H and V of two or more children and I only as a non-first child of
/// V. Parameters range over `0..=M`, M the largest observed coordinate; a
/// larger value would push some component past every observed position.
/// Returns the cheapest box placing every instance exactly.
pub fn minimal_box(instances: &[Instance], leaves: &[BoxExpr]) -> Option<BoxExpr> {
    let n = leaves.len();
    let m = instances.iter().flat_map(|i| i.pos.iter().map(|&(l, c)| l.max(c))).max().unwrap_or(0);
    let mut search = Search { instances, m, memo: HashMap::new() };
    let found = search.boxes(0, n);
    let leaf = |k: usize| leaves[k].clone();
    found.iter().map(|c| c.to_box(&leaf)).min_by_key(cost)
}

struct Search<'a> {
    instances: &'a [Instance],
    m: u32,
    memo: HashMap<(usize, usize), Vec<Cand>>,
}

impl Search<'_> {
    /// True when `c`, covering components `i..j`, places them relative to
    /// each other as every instance does.
    fn faithful(&self, c: &Cand, i: usize) -> bool {
        self.instances.iter().all(|inst| {
            let texts = |k: usize| BoxExpr::text(inst.texts[k].clone());
            let b = c.to_box(&texts);
            let mut placed = Vec::new();
            place(&b, 0, 0, &mut placed);
            let first = (placed[0].0 as i64, placed[0].1 as i64);
            let anchor = (inst.pos[i].0 as i64, inst.pos[i].1 as i64);
            placed.iter().enumerate().all(|(d, (l, col, _))| {
                let obs = inst.pos[i + d];
                (*l as i64 - first.0, *col as i64 - first.1) == (obs.0 as i64 - anchor.0, obs.1 as i64 - anchor.1)
            })
        })
    }

    fn boxes(&mut self, i: usize, j: usize) -> Vec<Cand> {
        if j == i + 1 {
            return vec![Cand::Leaf(i)];
        }
        if let Some(v) = self.memo.get(&(i, j)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for cuts in compositions(i, j) {
            let segs: Vec<Vec<Cand>> = cuts.windows(2).map(|w| self.boxes(w[0], w[1])).collect();
            if segs.iter().any(Vec::is_empty) {
                continue;
            }
            for hs in 0..=self.m {
                self.extend(i, &segs, &mut Vec::new(), &|cs| Cand::H(hs, cs), false, &mut out);
            }
            for vs in 0..=self.m {
                for is in 0..=self.m {
                    self.extend(i, &segs, &mut Vec::new(), &|cs| Cand::V(vs, is, cs), true, &mut out);
                }
            }
        }
        self.memo.insert((i, j), out.clone());
        out
    }

    /// Depth-first choice of one box per segment, pruning as soon as the
    /// children chosen so far misplace a component.
    fn extend(
        &self,
        i: usize,
        segs: &[Vec<Cand>],
        chosen: &mut Vec<Cand>,
        make: &dyn Fn(Vec<Cand>) -> Cand,
        shifts: bool,
        out: &mut Vec<Cand>,
    ) {
        let k = chosen.len();
        if k == segs.len() {
            out.push(make(chosen.clone()));
            return;
        }
        let mut options: Vec<Cand> = segs[k].clone();
        if shifts && k > 0 {
            for b in &segs[k] {
                for d in 1..=self.m {
                    options.push(Cand::I(d, Box::new(b.clone())));
                }
            }
        }
        for o in options {
            chosen.push(o);
            // A lone child would be a unary operator; check placement of
            // the partial box only once it has two children.
            if chosen.len() < 2 || self.faithful(&make(chosen.clone()), i) {
                self.extend(i, segs, chosen, make, shifts, out);
            }
            chosen.pop();
        }
    }
}

/// Cut points `i = c0 < c1 < ... < ck = j` with at least two segments.
fn compositions(i: usize, j: usize) -> Vec<Vec<usize>> {
    let inner: Vec<usize> = (i + 1..j).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << inner.len()) {
        let mut cuts = vec![i];
        cuts.extend(inner.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &c)| c));
        cuts.push(j);
        out.push(cuts);
    }
    out
}

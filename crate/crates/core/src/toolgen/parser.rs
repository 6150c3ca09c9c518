//! Earley recognizer plus a packed forest read back from the item sets.
//!
//! Nodes of the forest are `(nonterminal, from, to)` triples. Their
//! families (one per production and split) are recovered by walking the
//! item sets backwards, so the recognizer itself stores no back pointers.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::lexer::{LexError, Lexer, Token, TokenKind};
use super::{Pos, Span, Term};
use crate::metalang::{Grammar, LanguageDescription, LexClass, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum ParseError {
    #[error("{0}")]
    Lex(LexError),
    #[error("{line}:{column}: syntax error at {found}, expected {}", expected.join(" or "))]
    Syntax { line: u32, column: u32, found: String, expected: Vec<String> },
    #[error("ambiguous parse: both {first} and {second}")]
    Ambiguous { first: Term, second: Term },
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError::Lex(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sym {
    Lit(String),
    Class(LexClass),
    Nt(usize),
}

#[derive(Debug, Clone)]
struct Prod {
    lhs: usize,
    label: String,
    rhs: Vec<Sym>,
}

/// Parser tables for one grammar, reusable across inputs.
#[derive(Debug, Clone)]
pub struct Parser {
    lexer: Lexer,
    prods: Vec<Prod>,
    by_lhs: Vec<Vec<usize>>,
    start: usize,
}

type Item = (u32, u32, u32); // production, dot, origin
type Node = (usize, usize, usize); // nonterminal, from, to

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Child {
    Tok(usize),
    Node(Node),
}

#[derive(Debug, Clone)]
struct Family {
    prod: usize,
    children: Vec<Child>,
}

#[derive(Default)]
struct ItemSet {
    items: Vec<Item>,
    seen: HashSet<Item>,
    /// Items waiting on a nonterminal, by nonterminal.
    waiting: HashMap<usize, Vec<Item>>,
    /// Completed `(nonterminal, origin)` pairs.
    done: HashSet<(usize, usize)>,
}

impl ItemSet {
    fn add(&mut self, item: Item) {
        if self.seen.insert(item) {
            self.items.push(item);
        }
    }
}

struct Chart<'a> {
    parser: &'a Parser,
    tokens: &'a [Token],
    sets: Vec<ItemSet>,
}

impl Parser {
    pub fn new(grammar: &Grammar) -> Self {
        let mut names: Vec<&str> = grammar.nonterminals.iter().map(String::as_str).collect();
        for p in &grammar.productions {
            if !names.contains(&p.lhs.as_str()) {
                names.push(&p.lhs);
            }
        }
        let id = |n: &str| names.iter().position(|m| *m == n).expect("nonterminal is declared");
        let prods: Vec<Prod> = grammar
            .productions
            .iter()
            .map(|p| Prod {
                lhs: id(&p.lhs),
                label: p.label.clone(),
                rhs: p
                    .rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Literal(l) => Sym::Lit(l.clone()),
                        Symbol::Class(c) => Sym::Class(*c),
                        Symbol::Nonterminal(n) => Sym::Nt(id(n)),
                    })
                    .collect(),
            })
            .collect();
        let mut by_lhs = vec![Vec::new(); names.len()];
        for (i, p) in prods.iter().enumerate() {
            by_lhs[p.lhs].push(i);
        }
        Parser { lexer: Lexer::new(grammar), prods, by_lhs, start: id(&grammar.start) }
    }

    pub fn lexer(&self) -> &Lexer {
        &self.lexer
    }

    pub fn parse(&self, text: &str) -> Result<Term, ParseError> {
        let tokens = self.lexer.tokenize(text)?;
        self.parse_tokens(&tokens)
    }

    /// Parses a token stream ending with EOF.
    pub fn parse_tokens(&self, tokens: &[Token]) -> Result<Term, ParseError> {
        let chart = self.recognize(tokens)?;
        let root = (self.start, 0, chart.n());
        let forest = chart.forest(root);
        let count = forest.counts();
        let heights = forest.heights();
        let first = forest.build(root, &heights, &mut |_, _| None);
        if count[&root] < 2 {
            return Ok(first);
        }
        // Distinct derivations can still yield equal terms; that is not
        // ambiguity a user can observe.
        let Some(second) = forest.alternative(root, &count, &heights) else { return Ok(first) };
        Err(ParseError::Ambiguous { first: first.without_spans(), second: second.without_spans() })
    }

    /// Accepts exactly the token sequences derivable from the start symbol.
    pub fn recognizes(&self, tokens: &[Token]) -> bool {
        self.recognize(tokens).is_ok()
    }

    fn matches(sym: &Sym, tok: &Token) -> bool {
        match sym {
            Sym::Lit(l) => matches!(tok.kind, TokenKind::Keyword | TokenKind::Symbol) && tok.text == *l,
            Sym::Class(c) => tok.kind.class() == Some(*c),
            Sym::Nt(_) => false,
        }
    }

    fn recognize<'a>(&'a self, tokens: &'a [Token]) -> Result<Chart<'a>, ParseError> {
        let n = tokens.len() - 1; // last token is EOF
        let mut sets: Vec<ItemSet> = (0..=n).map(|_| ItemSet::default()).collect();
        for &p in &self.by_lhs[self.start] {
            sets[0].add((p as u32, 0, 0));
        }
        for k in 0..=n {
            let mut idx = 0;
            while idx < sets[k].items.len() {
                let (p, dot, origin) = sets[k].items[idx];
                idx += 1;
                let prod = &self.prods[p as usize];
                match prod.rhs.get(dot as usize) {
                    Some(Sym::Nt(b)) => {
                        let b = *b;
                        sets[k].waiting.entry(b).or_default().push((p, dot, origin));
                        for &q in &self.by_lhs[b] {
                            sets[k].add((q as u32, 0, k as u32));
                        }
                        // Nullable nonterminal already completed here.
                        if sets[k].done.contains(&(b, k)) {
                            sets[k].add((p, dot + 1, origin));
                        }
                    }
                    Some(sym) => {
                        if k < n && Self::matches(sym, &tokens[k]) {
                            sets[k + 1].add((p, dot + 1, origin));
                        }
                    }
                    None => {
                        let o = origin as usize;
                        if sets[k].done.insert((prod.lhs, o)) {
                            let waiting = sets[o].waiting.get(&prod.lhs).cloned().unwrap_or_default();
                            for (wp, wd, wo) in waiting {
                                sets[k].add((wp, wd + 1, wo));
                            }
                        }
                    }
                }
            }
            if k < n && sets[k + 1].items.is_empty() {
                return Err(self.syntax_error(&sets[k], &tokens[k]));
            }
        }
        if !sets[n].done.contains(&(self.start, 0)) {
            return Err(self.syntax_error(&sets[n], &tokens[n]));
        }
        Ok(Chart { parser: self, tokens, sets })
    }

    fn syntax_error(&self, set: &ItemSet, tok: &Token) -> ParseError {
        let mut expected: Vec<String> = set
            .items
            .iter()
            .filter_map(|&(p, dot, _)| match self.prods[p as usize].rhs.get(dot as usize)? {
                Sym::Lit(l) => Some(format!("{l:?}")),
                Sym::Class(c) => Some(c.name().to_string()),
                Sym::Nt(_) => None,
            })
            .collect();
        expected.sort();
        expected.dedup();
        ParseError::Syntax { line: tok.span.start.line, column: tok.span.start.column, found: tok.to_string(), expected }
    }
}

impl<'a> Chart<'a> {
    fn n(&self) -> usize {
        self.sets.len() - 1
    }

    fn has(&self, set: usize, item: (usize, usize, usize)) -> bool {
        self.sets[set].seen.contains(&(item.0 as u32, item.1 as u32, item.2 as u32))
    }

    /// All ways to derive `rhs[..dot]` of `prod` over tokens `from..to`.
    fn splits(&self, prod: usize, from: usize, dot: usize, to: usize) -> Vec<Vec<Child>> {
        if dot == 0 {
            return if to == from { vec![Vec::new()] } else { Vec::new() };
        }
        let mut out = Vec::new();
        match &self.parser.prods[prod].rhs[dot - 1] {
            Sym::Nt(b) => {
                for mid in from..=to {
                    if self.has(mid, (prod, dot - 1, from)) && self.sets[to].done.contains(&(*b, mid)) {
                        for mut d in self.splits(prod, from, dot - 1, mid) {
                            d.push(Child::Node((*b, mid, to)));
                            out.push(d);
                        }
                    }
                }
            }
            sym => {
                if to > from && Parser::matches(sym, &self.tokens[to - 1]) && self.has(to - 1, (prod, dot - 1, from)) {
                    for mut d in self.splits(prod, from, dot - 1, to - 1) {
                        d.push(Child::Tok(to - 1));
                        out.push(d);
                    }
                }
            }
        }
        out
    }

    fn forest(self, root: Node) -> Forest<'a> {
        let mut families: HashMap<Node, Vec<Family>> = HashMap::new();
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if families.contains_key(&node) {
                continue;
            }
            let (nt, from, to) = node;
            let mut fams = Vec::new();
            for &p in &self.parser.by_lhs[nt] {
                let len = self.parser.prods[p].rhs.len();
                if !self.has(to, (p, len, from)) {
                    continue;
                }
                for children in self.splits(p, from, len, to) {
                    for c in &children {
                        if let Child::Node(m) = c {
                            stack.push(*m);
                        }
                    }
                    fams.push(Family { prod: p, children });
                }
            }
            families.insert(node, fams);
        }
        Forest { chart: self, families }
    }
}

struct Forest<'a> {
    chart: Chart<'a>,
    families: HashMap<Node, Vec<Family>>,
}

impl Forest<'_> {
    /// Nodes grouped by span length, shortest first. Within a group
    /// values are computed to a fixpoint, which handles unit cycles.
    fn by_length(&self) -> Vec<Vec<Node>> {
        let mut nodes: Vec<Node> = self.families.keys().copied().collect();
        nodes.sort_by_key(|&(nt, i, j)| (j - i, i, nt));
        let mut groups: Vec<Vec<Node>> = Vec::new();
        for n in nodes {
            match groups.last_mut() {
                Some(g) if g[0].2 - g[0].1 == n.2 - n.1 => g.push(n),
                _ => groups.push(vec![n]),
            }
        }
        groups
    }

    /// Number of trees per node, capped at 2.
    fn counts(&self) -> HashMap<Node, u32> {
        let mut count: HashMap<Node, u32> = HashMap::new();
        for group in self.by_length() {
            loop {
                let mut changed = false;
                for node in &group {
                    let mut total = 0u32;
                    for f in &self.families[node] {
                        let mut prod = 1u32;
                        for c in &f.children {
                            if let Child::Node(m) = c {
                                prod = (prod * count.get(m).copied().unwrap_or(0)).min(2);
                            }
                        }
                        total = (total + prod).min(2);
                    }
                    if count.get(node).copied().unwrap_or(0) != total {
                        count.insert(*node, total);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        count
    }

    /// Minimal tree height per node, used to pick a finite first tree.
    fn heights(&self) -> HashMap<Node, (usize, usize)> {
        // (height, index of the family achieving it)
        let mut best: HashMap<Node, (usize, usize)> = HashMap::new();
        for group in self.by_length() {
            loop {
                let mut changed = false;
                for node in &group {
                    let mut cand: Option<(usize, usize)> = None;
                    for (fi, f) in self.families[node].iter().enumerate() {
                        let mut h = 0;
                        let mut ok = true;
                        for c in &f.children {
                            if let Child::Node(m) = c {
                                match best.get(m) {
                                    Some(&(hm, _)) => h = h.max(hm),
                                    None => ok = false,
                                }
                            }
                        }
                        if ok && cand.is_none_or(|(bh, _)| h + 1 < bh) {
                            cand = Some((h + 1, fi));
                        }
                    }
                    if let Some(c) = cand {
                        if best.get(node).is_none_or(|b| c.0 < b.0) {
                            best.insert(*node, c);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        best
    }

    fn span(&self, from: usize, to: usize) -> Span {
        let toks = self.chart.tokens;
        if from == to {
            let at: Pos = toks[from].span.start;
            Span { start: at, end: at }
        } else {
            Span { start: toks[from].span.start, end: toks[to - 1].span.end }
        }
    }

    fn term(&self, node: Node, fam: &Family, kids: Vec<Term>) -> Term {
        Term {
            label: self.chart.parser.prods[fam.prod].label.clone(),
            children: kids,
            payload: None,
            span: Some(self.span(node.1, node.2)),
        }
    }

    fn leaf(&self, prod: usize, k: usize, tok: usize) -> Option<Term> {
        let rhs = &self.chart.parser.prods[prod].rhs;
        let class = rhs.iter().filter(|s| !matches!(s, Sym::Nt(_))).nth(k)?;
        let Sym::Class(c) = class else { return None };
        let t = &self.chart.tokens[tok];
        Some(Term { label: c.name().to_string(), children: Vec::new(), payload: Some(t.text.clone()), span: Some(t.span) })
    }

    /// Builds the minimal-height tree under `node`; `pick` may override
    /// the family chosen at a node (used to diverge for the second tree).
    fn build(
        &self,
        node: Node,
        heights: &HashMap<Node, (usize, usize)>,
        pick: &mut dyn FnMut(&Self, Node) -> Option<usize>,
    ) -> Term {
        let fi = pick(self, node).unwrap_or(heights[&node].1);
        let fam = &self.families[&node][fi];
        let mut kids = Vec::new();
        let mut tok_k = 0;
        for c in &fam.children {
            match c {
                Child::Tok(t) => {
                    kids.extend(self.leaf(fam.prod, tok_k, *t));
                    tok_k += 1;
                }
                Child::Node(m) => kids.push(self.build(*m, heights, pick)),
            }
        }
        self.term(node, fam, kids)
    }

    /// A tree under `node` that differs from the one `build` returns.
    fn alternative(
        &self,
        node: Node,
        count: &HashMap<Node, u32>,
        heights: &HashMap<Node, (usize, usize)>,
    ) -> Option<Term> {
        let first = self.build(node, heights, &mut |_, _| None).without_spans();
        let default = heights[&node].1;
        let fams = &self.families[&node];
        // A different family whose tree differs from the default.
        for fi in 0..fams.len() {
            if fi == default {
                continue;
            }
            let mut once = Some(fi);
            let t = self.build(node, heights, &mut |_, m| if m == node { once.take() } else { None });
            if t.without_spans() != first {
                return Some(t);
            }
        }
        // Otherwise recurse into an ambiguous child of the default family.
        let fam = &fams[default];
        for (ci, c) in fam.children.iter().enumerate() {
            let Child::Node(m) = c else { continue };
            if count.get(m).copied().unwrap_or(0) < 2 {
                continue;
            }
            let Some(alt) = self.alternative(*m, count, heights) else { continue };
            let mut kids = Vec::new();
            let mut tok_k = 0;
            for (cj, c2) in fam.children.iter().enumerate() {
                match c2 {
                    Child::Tok(t) => {
                        kids.extend(self.leaf(fam.prod, tok_k, *t));
                        tok_k += 1;
                    }
                    Child::Node(_) if cj == ci => kids.push(alt.clone()),
                    Child::Node(m2) => kids.push(self.build(*m2, heights, &mut |_, _| None)),
                }
            }
            let t = self.term(node, fam, kids);
            if t.without_spans() != first {
                return Some(t);
            }
        }
        None
    }
}

pub fn parse_program(desc: &LanguageDescription, text: &str) -> Result<Term, ParseError> {
    Parser::new(&desc.grammar).parse(text)
}

pub fn parse_tokens(desc: &LanguageDescription, tokens: &[Token]) -> Result<Term, ParseError> {
    Parser::new(&desc.grammar).parse_tokens(tokens)
}

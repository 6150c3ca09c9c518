//! Brute-force derivation counting for epsilon-free grammars without unit
//! cycles: every way of splitting the input among the rhs symbols is tried.
//! Counts are exact up to `u64` saturation.

use std::collections::HashMap;

use lda_core::metalang::{Grammar, Symbol};

pub struct Cfg {
    start: String,
    prods: Vec<(String, Vec<Sym>)>,
    /// Terminal name to a spelling that lexes as that terminal.
    pub alphabet: Vec<(String, String)>,
}

#[derive(Clone)]
enum Sym {
    T(String),
    N(String),
}

impl Cfg {
    pub fn from_grammar(g: &Grammar) -> Self {
        let mut alphabet: Vec<(String, String)> = Vec::new();
        let mut prods = Vec::new();
        for p in &g.productions {
            let rhs: Vec<Sym> = p
                .rhs
                .iter()
                .map(|s| match s {
                    Symbol::Literal(l) => {
                        if !alphabet.iter().any(|(n, _)| n == l) {
                            alphabet.push((l.clone(), l.clone()));
                        }
                        Sym::T(l.clone())
                    }
                    Symbol::Class(c) => {
                        let name = c.name().to_string();
                        let spelling = match name.as_str() {
                            "ident" => "v",
                            "number" => "7",
                            _ => "\"s\"",
                        };
                        if !alphabet.iter().any(|(n, _)| *n == name) {
                            alphabet.push((name.clone(), spelling.to_string()));
                        }
                        Sym::T(name)
                    }
                    Symbol::Nonterminal(n) => Sym::N(n.clone()),
                })
                .collect();
            assert!(!rhs.is_empty(), "oracle needs an epsilon-free grammar");
            prods.push((p.lhs.clone(), rhs));
        }
        alphabet.sort();
        Cfg { start: g.start.clone(), prods, alphabet }
    }

    /// Number of derivation trees of `input` (terminal names).
    pub fn count(&self, input: &[&str]) -> u64 {
        if input.is_empty() {
            return 0;
        }
        let mut memo = HashMap::new();
        self.nt(&self.start, 0, input.len(), input, &mut memo)
    }

    fn nt<'a>(&'a self, n: &'a str, i: usize, j: usize, w: &[&str], memo: &mut HashMap<(&'a str, usize, usize), u64>) -> u64 {
        if let Some(&c) = memo.get(&(n, i, j)) {
            return c;
        }
        let mut total = 0u64;
        for (lhs, rhs) in &self.prods {
            if lhs == n {
                total = total.saturating_add(self.seq(rhs, i, j, w, memo));
            }
        }
        memo.insert((n, i, j), total);
        total
    }

    /// Ways to derive w[i..j) from `rhs`, each symbol taking at least one token.
    fn seq<'a>(&'a self, rhs: &'a [Sym], i: usize, j: usize, w: &[&str], memo: &mut HashMap<(&'a str, usize, usize), u64>) -> u64 {
        let Some((first, rest)) = rhs.split_first() else {
            return u64::from(i == j);
        };
        if j - i < rhs.len() {
            return 0;
        }
        let mut total = 0u64;
        let last_split = j - rest.len();
        for k in i + 1..=last_split {
            let head = match first {
                Sym::T(t) => u64::from(k == i + 1 && w[i] == t),
                Sym::N(m) => self.nt(m, i, k, w, memo),
            };
            if head == 0 {
                continue;
            }
            let tail = self.seq(rest, k, j, w, memo);
            total = total.saturating_add(head.saturating_mul(tail));
        }
        total
    }
}

/// Calls `f` on every word of length `0..=max` over `n` letters, as letter indices.
pub fn each_word(n: usize, max: usize, mut f: impl FnMut(&[usize])) {
    let mut word: Vec<usize> = Vec::new();
    fn go(n: usize, max: usize, word: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        f(word);
        if word.len() == max {
            return;
        }
        for a in 0..n {
            word.push(a);
            go(n, max, word, f);
            word.pop();
        }
    }
    go(n, max, &mut word, &mut f);
}

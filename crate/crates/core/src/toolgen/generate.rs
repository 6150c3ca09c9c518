use std::collections::HashMap;

use rand::Rng;

use super::Term;
use crate::metalang::{LanguageDescription, LexClass, Production, Symbol};

/// Smallest achievable depth per nonterminal; token leaves count 0.
fn min_depths(desc: &LanguageDescription) -> HashMap<&str, usize> {
    let g = &desc.grammar;
    let mut best: HashMap<&str, usize> = HashMap::new();
    loop {
        let mut changed = false;
        for p in &g.productions {
            if let Some(d) = prod_depth(p, &best) {
                if best.get(p.lhs.as_str()).is_none_or(|&b| d < b) {
                    best.insert(&p.lhs, d);
                    changed = true;
                }
            }
        }
        if !changed {
            return best;
        }
    }
}

fn prod_depth(p: &Production, best: &HashMap<&str, usize>) -> Option<usize> {
    let mut d = 0;
    for s in &p.rhs {
        if let Symbol::Nonterminal(n) = s {
            d = d.max(*best.get(n.as_str())?);
        }
    }
    Some(d + 1)
}

fn leaf(class: LexClass, keywords: &[&str], rng: &mut impl Rng) -> Term {
    let spelling = match class {
        LexClass::Number => rng.random_range(0..1000u32).to_string(),
        LexClass::String => {
            let n = rng.random_range(0..4);
            let body: String = (0..n).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
            format!("\"{body}\"")
        }
        LexClass::Ident => loop {
            let n = rng.random_range(1..4);
            let s: String = (0..n).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
            if !keywords.contains(&s.as_str()) {
                break s;
            }
        },
    };
    Term::leaf(class.name(), spelling)
}

/// A random term for the start symbol with at most `max_depth` production
/// nodes on any path. Returns `None` when no such term exists.
pub fn generate(desc: &LanguageDescription, rng: &mut impl Rng, max_depth: usize) -> Option<Term> {
    let depths = min_depths(desc);
    let keywords = desc.keywords();
    fn gen(
        desc: &LanguageDescription,
        depths: &HashMap<&str, usize>,
        keywords: &[&str],
        nt: &str,
        budget: usize,
        rng: &mut impl Rng,
    ) -> Option<Term> {
        let options: Vec<&Production> = desc
            .grammar
            .productions_of(nt)
            .map(|(_, p)| p)
            .filter(|p| prod_depth(p, depths).is_some_and(|d| d <= budget))
            .collect();
        if options.is_empty() {
            return None;
        }
        let p = options[rng.random_range(0..options.len())];
        let mut children = Vec::new();
        for s in &p.rhs {
            match s {
                Symbol::Literal(_) => {}
                Symbol::Class(c) => children.push(leaf(*c, keywords, rng)),
                Symbol::Nonterminal(n) => children.push(gen(desc, depths, keywords, n, budget - 1, rng)?),
            }
        }
        Some(Term::node(p.label.clone(), children))
    }
    gen(desc, &depths, &keywords, &desc.grammar.start, max_depth, rng)
}

//! The property runs behind the acceptance criteria. Each returns a short
//! summary on success and the first counterexample on failure, so the
//! core tests and the acceptance target share one implementation.

use std::collections::{BTreeMap, BTreeSet};

use lda_core::metalang::{compile_design, parse_grammar_text, BoxExpr, Grammar, GroundType, Symbol};
use lda_core::ppbe::{collect_layouts, infer_rules, overlay};
use lda_core::session::{finalize, replay, Decision, ViolationKind};
use lda_core::toolgen::{evaluate, format_term, generate, parse_program, typecheck, ParseError, Parser, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::box_oracle::{self, Instance};
use super::cfg_oracle::{each_word, Cfg};
use super::kb_oracle;

pub type Outcome = Result<String, String>;

/// State hash of the calc fixture, recorded when the fixture was created.
pub const CALC_STATE_HASH: &str = "376c0666dd6578d917acd2b3050df299d9e861be6235cf8bb003c6fcc7e5837d";

pub fn round_trip() -> Outcome {
    let desc = super::calc();
    let parser = Parser::new(&desc.grammar);
    let mut rng = StdRng::seed_from_u64(0xca1c);
    let mut deepest = 0;
    for k in 0..500 {
        let t = generate(&desc, &mut rng, 6).ok_or("Calc has no term of depth 6")?;
        deepest = deepest.max(t.depth());
        let text = format_term(&desc, &t).map_err(|e| format!("term {k} `{t}`: {e}"))?;
        let back = parser.parse(&text).map_err(|e| format!("term {k}: {e}\n{text}"))?;
        if !back.eq_modulo_spans(&t) {
            return Err(format!("term {k}: `{t}` came back as `{back}`\n{text}"));
        }
    }
    Ok(format!("500 terms, deepest {deepest}"))
}

pub const ORACLE_GRAMMARS: [(&str, &str); 3] = [
    ("sums", "Plus: E -> E \"+\" E\nLit: E -> number\n"),
    ("parens", "Pair: S -> \"(\" \")\"\nWrap: S -> \"(\" S \")\"\nCat: S -> S S\n"),
    ("dangling-else", "If: S -> \"if\" S\nIfElse: S -> \"if\" S \"else\" S\nDo: S -> ident\n"),
];

pub fn oracle_grammar(text: &str) -> Grammar {
    let prods = parse_grammar_text(text).expect("oracle grammar parses");
    Grammar::new(prods[0].lhs.clone(), prods)
}

/// Every word of up to `max` tokens over each grammar's alphabet, parsed
/// by the Earley parser and counted by the derivation enumerator.
pub fn parser_oracle(max: usize) -> Outcome {
    let mut summary = Vec::new();
    for (name, text) in ORACLE_GRAMMARS {
        let g = oracle_grammar(text);
        let cfg = Cfg::from_grammar(&g);
        let parser = Parser::new(&g);
        let mut words = Vec::new();
        each_word(cfg.alphabet.len(), max, |w| words.push(w.to_vec()));
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        let chunk = words.len().div_ceil(threads);
        let results: Vec<Result<(usize, usize), String>> = std::thread::scope(|s| {
            let handles: Vec<_> = words
                .chunks(chunk)
                .map(|part| s.spawn(|| check_words(&cfg, &parser, part)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let (mut accepted, mut ambiguous) = (0, 0);
        for r in results {
            let (a, b) = r.map_err(|e| format!("{name}: {e}"))?;
            accepted += a;
            ambiguous += b;
        }
        summary.push(format!("{name}: {} words, {accepted} accepted, {ambiguous} ambiguous", words.len()));
    }
    Ok(summary.join("; "))
}

fn check_words(cfg: &Cfg, parser: &Parser, words: &[Vec<usize>]) -> Result<(usize, usize), String> {
    let (mut accepted, mut ambiguous) = (0, 0);
    for w in words {
        let names: Vec<&str> = w.iter().map(|&a| cfg.alphabet[a].0.as_str()).collect();
        let text: Vec<&str> = w.iter().map(|&a| cfg.alphabet[a].1.as_str()).collect();
        let text = text.join(" ");
        let trees = cfg.count(&names);
        let got = parser.parse(&text);
        let ok = match (&got, trees) {
            (Err(ParseError::Syntax { .. }), 0) => true,
            (Ok(_), 1) => true,
            (Err(ParseError::Ambiguous { first, second }), n) if n >= 2 => first != second,
            _ => false,
        };
        if !ok {
            return Err(format!("`{text}`: enumerator finds {trees} trees, parser says {got:?}"));
        }
        accepted += usize::from(trees > 0);
        ambiguous += usize::from(trees > 1);
    }
    Ok((accepted, ambiguous))
}

/// Random select logs over every concept of the seed KB.
pub fn random_select_log(ids: &[String], rng: &mut impl Rng) -> Vec<Decision> {
    let n = rng.random_range(1..=12);
    (0..n).map(|i| Decision::select(i as u64 + 1, ids[rng.random_range(0..ids.len())].as_str())).collect()
}

pub fn closure_oracle() -> Outcome {
    let kb = super::seed_kb();
    let tables = kb_oracle::tables(&super::seed_doc());
    let mut rng = StdRng::seed_from_u64(0x1da);
    let mut conflicted = 0;
    for k in 0..200 {
        let log = random_select_log(&tables.ids, &mut rng);
        let s = replay(&kb, &log).map_err(|e| format!("log {k}: {e}"))?;
        let selected: BTreeSet<String> = s.selected.iter().map(|c| c.to_string()).collect();
        let pending: BTreeSet<String> = s.pending.iter().map(|c| c.to_string()).collect();
        if pending.len() != s.pending.len() || !pending.is_disjoint(&selected) {
            return Err(format!("log {k}: pending {:?} overlaps itself or the selection", s.pending));
        }
        let union: BTreeSet<String> = selected.union(&pending).cloned().collect();
        let want = tables.closure(&selected);
        if union != want {
            return Err(format!("log {k}: selected+pending {union:?}, closure {want:?}"));
        }
        let conflicts: BTreeSet<(String, String)> = s
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Conflict)
            .map(|v| (v.members[0].to_string(), v.members[1].to_string()))
            .collect();
        let want = tables.conflicts_within(&selected);
        if conflicts != want {
            return Err(format!("log {k}: conflicts {conflicts:?}, pair scan {want:?}"));
        }
        conflicted += usize::from(!conflicts.is_empty());
    }
    Ok(format!("200 logs, {conflicted} with conflicts"))
}

pub fn replay_golden() -> Outcome {
    let kb = super::seed_kb();
    let log = super::log("fixtures/calc.decisions.json");
    let a = replay(&kb, &log).map_err(|e| e.to_string())?;
    let b = replay(&kb, &log).map_err(|e| e.to_string())?;
    if a.state_hash != b.state_hash {
        return Err(format!("state hash {} then {}", a.state_hash, b.state_hash));
    }
    if a.state_hash != CALC_STATE_HASH {
        return Err(format!("state hash {} differs from the recorded {CALC_STATE_HASH}", a.state_hash));
    }
    let design = finalize(&kb, &a, "calc", "Prog").map_err(|e| e.to_string())?;
    let desc = compile_design(&design).map_err(|e| e.to_string())?.to_json();
    let golden = super::read("golden/calc.desc.json");
    if desc != golden {
        let at = desc.bytes().zip(golden.bytes()).take_while(|(a, b)| a == b).count();
        return Err(format!("description differs from golden/calc.desc.json at byte {at}"));
    }
    Ok(format!("hash {}, {} bytes", &a.state_hash[..12], desc.len()))
}

pub const CALC_PROGRAM: &str = "x := 2; print x + 3;";

pub fn calc_end_to_end() -> Outcome {
    let desc = super::calc();
    let t = parse_program(&desc, CALC_PROGRAM).map_err(|e| e.to_string())?;
    let ty = typecheck(&desc, &t).map_err(|e| e.to_string())?;
    if ty != GroundType::Unit {
        return Err(format!("program has type {ty}"));
    }
    let (_, store) = evaluate(&desc, &t, lda_core::toolgen::DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let (output, vars) = super::calc_oracle::run(CALC_PROGRAM)?;
    let got: Vec<Value> = output.iter().map(|&n| Value::Int(n)).collect();
    if store.output != got {
        return Err(format!("output {:?}, oracle {output:?}", store.output));
    }
    let want: BTreeMap<String, Value> = vars.into_iter().map(|(k, v)| (k, Value::Int(v))).collect();
    if store.vars != want {
        return Err(format!("store {:?}, oracle {want:?}", store.vars));
    }
    if output != [5] {
        return Err(format!("oracle printed {output:?}"));
    }
    Ok("output [5], x = 2".into())
}

/// Inferred rules alone, with the hand-written ones removed, must
/// reproduce every corpus example.
pub fn ppbe_faithful() -> Outcome {
    let mut desc = super::calccond();
    desc.formatting.clear();
    desc.provenance.retain(|k, _| !k.starts_with("formatting:"));
    let corpus = super::corpus("fixtures/ppbe");
    if corpus.len() != 12 {
        return Err(format!("corpus has {} examples", corpus.len()));
    }
    let obs = collect_layouts(&desc.grammar, &corpus).map_err(|e| e.to_string())?;
    let rules = infer_rules(&obs).map_err(|cs| format!("{} conflicts, first: {}", cs.len(), cs[0]))?;
    let desc = overlay(&desc, &rules);
    for (name, text) in &corpus {
        let t = parse_program(&desc, text).map_err(|e| format!("{name}: {e}"))?;
        let out = format_term(&desc, &t).map_err(|e| format!("{name}: {e}"))?;
        if &out != text {
            return Err(format!("{name} reformats as\n{out}"));
        }
    }
    Ok(format!("12 examples, {} rules", rules.len()))
}

/// A flat production and a hidden layout for it.
#[derive(Debug, Clone)]
pub struct FlatCase {
    pub grammar: Grammar,
    pub hidden: BoxExpr,
}

const LITERALS: [&str; 5] = ["do", "(", ")", ";", "+"];
const IDENTS: [&str; 4] = ["a", "bb", "ccc", "dddd"];

/// Random box over `Ref(lo..hi)` in the searched dialect.
fn random_box(rng: &mut impl Rng, lo: usize, hi: usize) -> BoxExpr {
    if hi == lo + 1 {
        return BoxExpr::Ref(lo);
    }
    let mut cuts = vec![lo];
    for c in lo + 1..hi {
        if rng.random_bool(0.5) {
            cuts.push(c);
        }
    }
    if cuts.len() == 1 {
        cuts.push(rng.random_range(lo + 1..hi));
    }
    cuts.push(hi);
    let kids: Vec<BoxExpr> = cuts.windows(2).map(|w| random_box(rng, w[0], w[1])).collect();
    if rng.random_bool(0.5) {
        BoxExpr::h(rng.random_range(0..3), kids)
    } else {
        let kids = kids
            .into_iter()
            .enumerate()
            .map(|(k, b)| if k > 0 && rng.random_bool(0.3) { BoxExpr::i(rng.random_range(1..4), b) } else { b })
            .collect();
        BoxExpr::v(rng.random_range(0..2), rng.random_range(0..4), kids)
    }
}

pub fn flat_case(rng: &mut impl Rng) -> FlatCase {
    let n = rng.random_range(2..=5);
    let rhs: Vec<String> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                "ident".to_string()
            } else {
                format!("{:?}", LITERALS[rng.random_range(0..LITERALS.len())])
            }
        })
        .collect();
    let text = format!("Row: S -> {}\n", rhs.join(" "));
    let prods = parse_grammar_text(&text).expect("flat grammar parses");
    FlatCase { grammar: Grammar::new("S", prods), hidden: random_box(rng, 0, n) }
}

fn substitute(b: &BoxExpr, texts: &[String]) -> BoxExpr {
    match b {
        BoxExpr::Ref(k) => BoxExpr::text(texts[*k].clone()),
        BoxExpr::Text(_) => b.clone(),
        BoxExpr::H { hs, children } => BoxExpr::h(*hs, children.iter().map(|c| substitute(c, texts)).collect()),
        BoxExpr::V { vs, is, children } => BoxExpr::v(*vs, *is, children.iter().map(|c| substitute(c, texts)).collect()),
        BoxExpr::I { is, child } => BoxExpr::i(*is, substitute(child, texts)),
    }
}

/// Named example texts.
pub type Examples = Vec<(String, String)>;

/// Examples of a flat case: each is the hidden layout filled with random
/// identifiers, kept only when it reads back as one `Row`. Also returns
/// the component positions the reference renderer assigns.
pub fn flat_examples(case: &FlatCase, rng: &mut impl Rng, count: usize) -> Option<(Examples, Vec<Instance>)> {
    let prod = &case.grammar.productions[0];
    let parser = Parser::new(&case.grammar);
    let (mut examples, mut instances) = (Vec::new(), Vec::new());
    for attempt in 0..count * 10 {
        if examples.len() == count {
            break;
        }
        let texts: Vec<String> = prod
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::Literal(l) => l.clone(),
                _ => IDENTS[rng.random_range(0..IDENTS.len())].to_string(),
            })
            .collect();
        let b = substitute(&case.hidden, &texts);
        let text = box_oracle::render(&b);
        let reads_back = parsed_tokens(&parser, &text) == Some(prod.rhs.len());
        if !reads_back || text.starts_with(char::is_whitespace) {
            continue;
        }
        let mut placed = Vec::new();
        box_oracle::place(&b, 0, 0, &mut placed);
        examples.push((format!("row{attempt}.ex"), text));
        instances.push(Instance { texts, pos: placed.iter().map(|&(l, c, _)| (l, c)).collect() });
    }
    (examples.len() == count).then_some((examples, instances))
}

/// Token count of `text` when it parses, not counting end of input.
fn parsed_tokens(parser: &Parser, text: &str) -> Option<usize> {
    let tokens = parser.lexer().tokenize(text).ok()?;
    parser.parse_tokens(&tokens).ok()?;
    Some(tokens.len() - 1)
}

/// Inferred rules for random flat productions against exhaustive search.
pub fn ppbe_minimal(cases: usize) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xb0c5);
    let mut done = 0;
    let mut recovered = 0;
    while done < cases {
        let case = flat_case(&mut rng);
        let Some((examples, instances)) = flat_examples(&case, &mut rng, 3) else { continue };
        let obs = collect_layouts(&case.grammar, &examples).map_err(|e| e.to_string())?;
        let inferred = infer_rules(&obs).map_err(|cs| format!("{}: conflict {}", case.hidden, cs[0]))?;
        let leaves: Vec<BoxExpr> = case.grammar.productions[0]
            .rhs
            .iter()
            .enumerate()
            .map(|(k, s)| match s {
                Symbol::Literal(l) => BoxExpr::text(l.clone()),
                _ => BoxExpr::Ref(k),
            })
            .collect();
        let want = box_oracle::minimal_box(&instances, &leaves).ok_or("exhaustive search found nothing")?;
        let got = &inferred["Row"];
        if *got != want {
            return Err(format!(
                "hidden {} over {:?}: inferred {got}, exhaustive {want}",
                case.hidden, examples[0].1
            ));
        }
        recovered += usize::from(substitute_literals(&case) == want);
        done += 1;
    }
    Ok(format!("{cases} productions, {recovered} recovered their hidden box exactly"))
}

fn substitute_literals(case: &FlatCase) -> BoxExpr {
    let texts: Vec<Option<String>> = case.grammar.productions[0]
        .rhs
        .iter()
        .map(|s| match s {
            Symbol::Literal(l) => Some(l.clone()),
            _ => None,
        })
        .collect();
    fn go(b: &BoxExpr, texts: &[Option<String>]) -> BoxExpr {
        match b {
            BoxExpr::Ref(k) => texts[*k].clone().map_or(BoxExpr::Ref(*k), BoxExpr::text),
            BoxExpr::Text(_) => b.clone(),
            BoxExpr::H { hs, children } => BoxExpr::h(*hs, children.iter().map(|c| go(c, texts)).collect()),
            BoxExpr::V { vs, is, children } => BoxExpr::v(*vs, *is, children.iter().map(|c| go(c, texts)).collect()),
            BoxExpr::I { is, child } => BoxExpr::i(*is, go(child, texts)),
        }
    }
    go(&case.hidden, &texts)
}

pub fn ppbe_conflicts() -> Outcome {
    let desc = super::calc();
    let corpus = super::corpus("fixtures/ppbe-conflict");
    let obs = collect_layouts(&desc.grammar, &corpus).map_err(|e| e.to_string())?;
    let Err(got) = infer_rules(&obs) else {
        return Err("inconsistent corpus inferred without conflicts".into());
    };
    let got = serde_json::to_value(&got).map_err(|e| e.to_string())?;
    let want: serde_json::Value = serde_json::from_str(&super::read("fixtures/ppbe-conflict/expected.json"))
        .map_err(|e| e.to_string())?;
    if got != want {
        return Err(format!("conflicts {got}"));
    }
    Ok(format!("{} conflict(s) as expected", want.as_array().map_or(0, Vec::len)))
}

pub fn ppbe_all() -> Outcome {
    let a = ppbe_faithful()?;
    let b = ppbe_minimal(MINIMAL_CASES)?;
    let c = ppbe_conflicts()?;
    Ok(format!("{a}; {b}; {c}"))
}

pub const MINIMAL_CASES: usize = 150;

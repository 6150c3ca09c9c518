//! Direct interpreter for Calc source text: `x := e ;` and `print e ;` with
//! `+`, parentheses, numbers and variables. Written by hand for this one
//! language, it never looks at a language description.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Num(i64),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = cs[s..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|e| format!("{e}"))?));
        } else if c.is_ascii_alphabetic() {
            let s = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Id(cs[s..i].iter().collect()));
        } else if c == ':' && cs.get(i + 1) == Some(&'=') {
            out.push(Tok::Sym(":="));
            i += 2;
        } else {
            let sym = match c {
                '+' => "+",
                ';' => ";",
                '(' => "(",
                ')' => ")",
                _ => return Err(format!("bad character {c:?}")),
            };
            out.push(Tok::Sym(sym));
            i += 1;
        }
    }
    Ok(out)
}

struct Run {
    toks: Vec<Tok>,
    at: usize,
    store: BTreeMap<String, i64>,
    output: Vec<i64>,
}

impl Run {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn expect(&mut self, s: &str) -> Result<(), String> {
        match self.peek() {
            Some(Tok::Sym(x)) if *x == s => {
                self.at += 1;
                Ok(())
            }
            other => Err(format!("expected {s}, found {other:?}")),
        }
    }

    fn atom(&mut self) -> Result<i64, String> {
        let t = self.peek().cloned();
        self.at += 1;
        match t {
            Some(Tok::Num(n)) => Ok(n),
            Some(Tok::Id(x)) if x != "print" => self.store.get(&x).copied().ok_or(format!("unbound {x}")),
            Some(Tok::Sym("(")) => {
                let v = self.expr()?;
                self.expect(")")?;
                Ok(v)
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }

    fn expr(&mut self) -> Result<i64, String> {
        let mut v = self.atom()?;
        while self.peek() == Some(&Tok::Sym("+")) {
            self.at += 1;
            v = v.checked_add(self.atom()?).ok_or("overflow")?;
        }
        Ok(v)
    }

    fn stmt(&mut self) -> Result<(), String> {
        match self.peek().cloned() {
            Some(Tok::Id(k)) if k == "print" => {
                self.at += 1;
                let v = self.expr()?;
                self.output.push(v);
            }
            Some(Tok::Id(x)) => {
                self.at += 1;
                self.expect(":=")?;
                let v = self.expr()?;
                self.store.insert(x, v);
            }
            other => return Err(format!("unexpected {other:?}")),
        }
        self.expect(";")
    }
}

/// Output list and final store of a Calc program.
pub fn run(src: &str) -> Result<(Vec<i64>, BTreeMap<String, i64>), String> {
    let mut r = Run { toks: lex(src)?, at: 0, store: BTreeMap::new(), output: Vec::new() };
    while r.at < r.toks.len() {
        r.stmt()?;
    }
    Ok((r.output, r.store))
}

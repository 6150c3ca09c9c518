//! Evaluation-rule sublanguage: one big-step rule per line.
//!
//! ```text
//! rule     ::= Label ":" [premise ("," premise)*] "=>" (var | "unit")
//! premise  ::= "eval" ($N | "self") "->" var
//!            | var "=" op "(" var ("," var)* ")"
//!            | "get" $N "->" var | "set" $N "<-" var
//!            | "emit" var
//!            | "if" var "{" premises "}" ["else" "{" premises "}"]
//! op       ::= add | sub | mul | lt | concat | not
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::scan::{is_lower_name, parse_lines, Cursor, Tok};
use super::ParseError;

const KEYWORDS: &[&str] = &["eval", "self", "get", "set", "emit", "if", "else", "unit"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Concat,
    Not,
}

impl BuiltinOp {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinOp::Add => "add",
            BuiltinOp::Sub => "sub",
            BuiltinOp::Mul => "mul",
            BuiltinOp::Lt => "lt",
            BuiltinOp::Concat => "concat",
            BuiltinOp::Not => "not",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "add" => BuiltinOp::Add,
            "sub" => BuiltinOp::Sub,
            "mul" => BuiltinOp::Mul,
            "lt" => BuiltinOp::Lt,
            "concat" => BuiltinOp::Concat,
            "not" => BuiltinOp::Not,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        if self == BuiltinOp::Not {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalTarget {
    Child(usize),
    /// Re-evaluate the node the rule is applied to.
    SelfNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Premise {
    Eval { target: EvalTarget, var: String },
    Builtin { op: BuiltinOp, args: Vec<String>, result: String },
    StoreGet { child: usize, var: String },
    StoreSet { child: usize, var: String },
    Emit { var: String },
    If { cond: String, then: Vec<Premise>, otherwise: Vec<Premise> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    Var(String),
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRule {
    pub label: String,
    pub premises: Vec<Premise>,
    pub conclusion: Conclusion,
}

fn write_premises(f: &mut fmt::Formatter<'_>, ps: &[Premise]) -> fmt::Result {
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, " {p}")?;
    }
    Ok(())
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Eval { target: EvalTarget::Child(i), var } => write!(f, "eval ${i} -> {var}"),
            Premise::Eval { target: EvalTarget::SelfNode, var } => write!(f, "eval self -> {var}"),
            Premise::Builtin { op, args, result } => write!(f, "{result} = {}({})", op.name(), args.join(", ")),
            Premise::StoreGet { child, var } => write!(f, "get ${child} -> {var}"),
            Premise::StoreSet { child, var } => write!(f, "set ${child} <- {var}"),
            Premise::Emit { var } => write!(f, "emit {var}"),
            Premise::If { cond, then, otherwise } => {
                write!(f, "if {cond} {{")?;
                write_premises(f, then)?;
                f.write_str(" } else {")?;
                write_premises(f, otherwise)?;
                f.write_str(" }")
            }
        }
    }
}

impl fmt::Display for EvalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        write_premises(f, &self.premises)?;
        match &self.conclusion {
            Conclusion::Var(v) => write!(f, " => {v}"),
            Conclusion::Unit => f.write_str(" => unit"),
        }
    }
}

impl EvalRule {
    /// Variables used before any premise defines them. Definitions inside
    /// an `if` branch are local to that branch.
    pub fn undefined_vars(&self) -> Vec<String> {
        fn walk(ps: &[Premise], defined: &mut BTreeSet<String>, missing: &mut Vec<String>) {
            let use_var = |v: &String, defined: &BTreeSet<String>, missing: &mut Vec<String>| {
                if !defined.contains(v) && !missing.contains(v) {
                    missing.push(v.clone());
                }
            };
            for p in ps {
                match p {
                    Premise::Eval { var, .. } | Premise::StoreGet { var, .. } => {
                        defined.insert(var.clone());
                    }
                    Premise::Builtin { args, result, .. } => {
                        for a in args {
                            use_var(a, defined, missing);
                        }
                        defined.insert(result.clone());
                    }
                    Premise::StoreSet { var, .. } | Premise::Emit { var } => use_var(var, defined, missing),
                    Premise::If { cond, then, otherwise } => {
                        use_var(cond, defined, missing);
                        walk(then, &mut defined.clone(), missing);
                        walk(otherwise, &mut defined.clone(), missing);
                    }
                }
            }
        }
        let mut defined = BTreeSet::new();
        let mut missing = Vec::new();
        walk(&self.premises, &mut defined, &mut missing);
        if let Conclusion::Var(v) = &self.conclusion {
            if !defined.contains(v) && !missing.contains(v) {
                missing.push(v.clone());
            }
        }
        missing
    }

    pub fn child_refs(&self) -> Vec<usize> {
        fn walk(ps: &[Premise], out: &mut Vec<usize>) {
            for p in ps {
                match p {
                    Premise::Eval { target: EvalTarget::Child(i), .. }
                    | Premise::StoreGet { child: i, .. }
                    | Premise::StoreSet { child: i, .. } => out.push(*i),
                    Premise::If { then, otherwise, .. } => {
                        walk(then, out);
                        walk(otherwise, out);
                    }
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.premises, &mut out);
        out
    }
}

fn expect_var(cur: &mut Cursor) -> Result<String, ParseError> {
    match cur.peek() {
        Tok::Word(w) if is_lower_name(w) && !KEYWORDS.contains(&w.as_str()) => {
            let w = w.clone();
            cur.bump();
            Ok(w)
        }
        _ => Err(cur.error(&["variable"])),
    }
}

fn parse_block(cur: &mut Cursor) -> Result<Vec<Premise>, ParseError> {
    cur.expect_punct("{")?;
    let mut out = Vec::new();
    if cur.eat_punct("}") {
        return Ok(out);
    }
    loop {
        out.push(parse_premise(cur)?);
        if cur.eat_punct(",") {
            continue;
        }
        cur.expect_punct("}")?;
        return Ok(out);
    }
}

fn parse_premise(cur: &mut Cursor) -> Result<Premise, ParseError> {
    if cur.eat_word("eval") {
        let target = if cur.eat_word("self") {
            EvalTarget::SelfNode
        } else if matches!(cur.peek(), Tok::ChildRef(_)) {
            EvalTarget::Child(cur.expect_child()?)
        } else {
            return Err(cur.error(&["child reference `$N`", "`self`"]));
        };
        cur.expect_punct("->")?;
        return Ok(Premise::Eval { target, var: expect_var(cur)? });
    }
    if cur.eat_word("get") {
        let child = cur.expect_child()?;
        cur.expect_punct("->")?;
        return Ok(Premise::StoreGet { child, var: expect_var(cur)? });
    }
    if cur.eat_word("set") {
        let child = cur.expect_child()?;
        cur.expect_punct("<-")?;
        return Ok(Premise::StoreSet { child, var: expect_var(cur)? });
    }
    if cur.eat_word("emit") {
        return Ok(Premise::Emit { var: expect_var(cur)? });
    }
    if cur.eat_word("if") {
        let cond = expect_var(cur)?;
        let then = parse_block(cur)?;
        let otherwise = if cur.eat_word("else") { parse_block(cur)? } else { Vec::new() };
        return Ok(Premise::If { cond, then, otherwise });
    }
    if !matches!(cur.peek(), Tok::Word(_)) {
        return Err(cur.error(&["`eval`", "`get`", "`set`", "`emit`", "`if`", "variable"]));
    }
    let result = expect_var(cur)?;
    cur.expect_punct("=")?;
    let op = match cur.peek() {
        Tok::Word(w) => match BuiltinOp::from_name(w) {
            Some(op) => op,
            None => return Err(cur.error(&["`add`", "`sub`", "`mul`", "`lt`", "`concat`", "`not`"])),
        },
        _ => return Err(cur.error(&["builtin operator"])),
    };
    cur.bump();
    cur.expect_punct("(")?;
    let mut args = vec![expect_var(cur)?];
    while cur.eat_punct(",") {
        args.push(expect_var(cur)?);
    }
    if args.len() != op.arity() {
        return Err(cur.error(&[&format!("{} argument(s) for `{}`", op.arity(), op.name())]));
    }
    cur.expect_punct(")")?;
    Ok(Premise::Builtin { op, args, result })
}

pub(crate) fn parse_eval_rule(cur: &mut Cursor) -> Result<EvalRule, ParseError> {
    let label = cur.expect_label()?;
    cur.expect_punct(":")?;
    let mut premises = Vec::new();
    if !cur.eat_punct("=>") {
        loop {
            premises.push(parse_premise(cur)?);
            if cur.eat_punct(",") {
                continue;
            }
            if cur.eat_punct("=>") {
                break;
            }
            return Err(cur.error(&["`,`", "`=>`"]));
        }
    }
    let conclusion = if cur.eat_word("unit") { Conclusion::Unit } else { Conclusion::Var(expect_var(cur)?) };
    Ok(EvalRule { label, premises, conclusion })
}

pub fn parse_eval_text(text: &str) -> Result<Vec<EvalRule>, ParseError> {
    parse_lines(text, parse_eval_rule)
}

//! Big-step interpreter driven by the evaluation rules. Runs on an
//! explicit stack so deep `eval self` loops cannot overflow the host stack.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Span, Term};
use crate::metalang::{BuiltinOp, Conclusion, EvalRule, EvalTarget, LanguageDescription, LexClass, Premise};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Unit,
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Str(_) => "string",
            Value::Unit => "unit",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::Unit => f.write_str("()"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Store {
    pub vars: BTreeMap<String, Value>,
    pub output: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "kebab-case")]
pub enum EvalError {
    #[error("fuel must be at least 1")]
    ZeroFuel,
    #[error("evaluation ran out of fuel ({fuel} steps)")]
    FuelExhausted { fuel: u64 },
    #[error("variable `{name}` is unbound")]
    UnboundVariable { name: String, span: Option<Span> },
    #[error("`{op}` cannot be applied to {}", kinds.join(", "))]
    BuiltinTypeError { op: String, kinds: Vec<String> },
    #[error("integer overflow in `{op}`")]
    IntegerOverflow { op: String },
    #[error("no evaluation rule for `{label}`")]
    NoRule { label: String },
    #[error("term `{label}` does not match its production")]
    Malformed { label: String },
}

impl EvalError {
    /// Errors caused by the description rather than by the program.
    pub fn is_description_bug(&self) -> bool {
        matches!(self, EvalError::NoRule { .. } | EvalError::Malformed { .. })
    }
}

struct Frame<'a> {
    term: &'a Term,
    rule: &'a EvalRule,
    env: HashMap<&'a str, Value>,
    /// Premise lists being executed, innermost last, with the next index.
    conts: Vec<(&'a [Premise], usize)>,
    /// Variable receiving the value of the frame pushed above this one.
    awaiting: Option<&'a str>,
}

fn leaf_value(t: &Term) -> Result<Option<Value>, EvalError> {
    let Some(p) = &t.payload else { return Ok(None) };
    Ok(Some(match LexClass::from_name(&t.label) {
        Some(LexClass::Number) => {
            Value::Int(p.parse().map_err(|_| EvalError::IntegerOverflow { op: "number".into() })?)
        }
        Some(LexClass::String) => Value::Str(unquote(p)),
        _ => Value::Str(p.clone()),
    }))
}

fn unquote(s: &str) -> String {
    let inner = s.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(s);
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn builtin(op: BuiltinOp, args: &[Value]) -> Result<Value, EvalError> {
    let overflow = || EvalError::IntegerOverflow { op: op.name().into() };
    Ok(match (op, args) {
        (BuiltinOp::Add, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_add(*b).ok_or_else(overflow)?),
        (BuiltinOp::Sub, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_sub(*b).ok_or_else(overflow)?),
        (BuiltinOp::Mul, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_mul(*b).ok_or_else(overflow)?),
        (BuiltinOp::Lt, [Value::Int(a), Value::Int(b)]) => Value::Bool(a < b),
        (BuiltinOp::Concat, [Value::Str(a), Value::Str(b)]) => Value::Str(format!("{a}{b}")),
        (BuiltinOp::Not, [Value::Bool(a)]) => Value::Bool(!a),
        _ => {
            return Err(EvalError::BuiltinTypeError {
                op: op.name().into(),
                kinds: args.iter().map(|v| v.kind().to_string()).collect(),
            })
        }
    })
}

struct Machine<'a> {
    desc: &'a LanguageDescription,
    stack: Vec<Frame<'a>>,
    store: Store,
}

impl<'a> Machine<'a> {
    fn frame(&self, t: &'a Term) -> Result<Frame<'a>, EvalError> {
        let rule = self.desc.evaluation.get(&t.label).ok_or_else(|| EvalError::NoRule { label: t.label.clone() })?;
        Ok(Frame { term: t, rule, env: HashMap::new(), conts: vec![(&rule.premises, 0)], awaiting: None })
    }

    fn child(&self, t: &'a Term, pos: usize) -> Result<&'a Term, EvalError> {
        let malformed = || EvalError::Malformed { label: t.label.clone() };
        let prod = self.desc.production(&t.label).ok_or_else(malformed)?;
        t.children.get(prod.child_index_of(pos).ok_or_else(malformed)?).ok_or_else(malformed)
    }

    fn var(env: &HashMap<&str, Value>, name: &str) -> Value {
        // Rules are validated: every variable is defined before use.
        env.get(name).cloned().unwrap_or(Value::Unit)
    }

    fn ident(&self, t: &'a Term, pos: usize) -> Result<(&'a Term, String), EvalError> {
        let c = self.child(t, pos)?;
        Ok((c, c.payload.clone().unwrap_or_default()))
    }

    /// Runs one premise of the top frame, or finishes the frame.
    /// Returns the final value once the bottom frame finishes.
    fn step(&mut self, fuel: &mut u64, initial: u64) -> Result<Option<Value>, EvalError> {
        let top = self.stack.last_mut().expect("stack is non-empty");
        while let Some(&(list, i)) = top.conts.last() {
            if i < list.len() {
                break;
            }
            top.conts.pop();
        }
        let Some((list, i)) = top.conts.last_mut() else {
            let frame = self.stack.pop().expect("non-empty");
            let value = match &frame.rule.conclusion {
                Conclusion::Var(v) => Self::var(&frame.env, v),
                Conclusion::Unit => Value::Unit,
            };
            return Ok(self.deliver(value));
        };
        let premise: &'a Premise = &list[*i];
        *i += 1;
        if *fuel == 0 {
            return Err(EvalError::FuelExhausted { fuel: initial });
        }
        *fuel -= 1;
        let term = top.term;
        match premise {
            Premise::Eval { target, var } => {
                let target = match target {
                    EvalTarget::Child(pos) => self.child(term, *pos)?,
                    EvalTarget::SelfNode => term,
                };
                if let Some(v) = leaf_value(target)? {
                    self.stack.last_mut().expect("non-empty").env.insert(var, v);
                } else {
                    let frame = self.frame(target)?;
                    self.stack.last_mut().expect("non-empty").awaiting = Some(var);
                    self.stack.push(frame);
                }
            }
            Premise::Builtin { op, args, result } => {
                let top = self.stack.last_mut().expect("non-empty");
                let vals: Vec<Value> = args.iter().map(|a| Self::var(&top.env, a)).collect();
                let v = builtin(*op, &vals)?;
                top.env.insert(result, v);
            }
            Premise::StoreGet { child, var } => {
                let (c, name) = self.ident(term, *child)?;
                let v = self
                    .store
                    .vars
                    .get(&name)
                    .cloned()
                    .ok_or(EvalError::UnboundVariable { name, span: c.span })?;
                self.stack.last_mut().expect("non-empty").env.insert(var, v);
            }
            Premise::StoreSet { child, var } => {
                let (_, name) = self.ident(term, *child)?;
                let v = Self::var(&self.stack.last().expect("non-empty").env, var);
                self.store.vars.insert(name, v);
            }
            Premise::Emit { var } => {
                let v = Self::var(&self.stack.last().expect("non-empty").env, var);
                self.store.output.push(v);
            }
            Premise::If { cond, then, otherwise } => {
                let top = self.stack.last_mut().expect("non-empty");
                let branch = match Self::var(&top.env, cond) {
                    Value::Bool(true) => then,
                    Value::Bool(false) => otherwise,
                    other => {
                        return Err(EvalError::BuiltinTypeError { op: "if".into(), kinds: vec![other.kind().into()] })
                    }
                };
                top.conts.push((branch, 0));
            }
        }
        Ok(None)
    }

    fn deliver(&mut self, value: Value) -> Option<Value> {
        match self.stack.last_mut() {
            None => Some(value),
            Some(parent) => {
                let var = parent.awaiting.take().expect("parent awaits a value");
                parent.env.insert(var, value);
                None
            }
        }
    }
}

/// Evaluates `t`; every executed premise costs one unit of fuel.
pub fn evaluate(desc: &LanguageDescription, t: &Term, fuel: u64) -> Result<(Value, Store), EvalError> {
    if fuel == 0 {
        return Err(EvalError::ZeroFuel);
    }
    if let Some(v) = leaf_value(t)? {
        return Ok((v, Store::default()));
    }
    let mut m = Machine { desc, stack: Vec::new(), store: Store::default() };
    let root = m.frame(t)?;
    m.stack.push(root);
    let mut left = fuel;
    loop {
        if let Some(v) = m.step(&mut left, fuel)? {
            return Ok((v, m.store));
        }
    }
}

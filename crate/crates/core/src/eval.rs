//! Concrete evaluation of expressions over finite models.
//!
//! Arrays are total maps given by finitely many explicit entries plus a
//! default element. Quantifiers range over an explicit finite index domain,
//! which is how every finite-model check in this crate interprets them.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Expr, Op, Quantifier, Sort, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ArrayValue {
    /// Entries that differ from `default`.
    pub entries: BTreeMap<i64, i64>,
    pub default: i64,
}

impl ArrayValue {
    pub fn constant(default: i64) -> Self {
        ArrayValue {
            entries: BTreeMap::new(),
            default,
        }
    }

    /// Array holding `elems` at indices `0..elems.len()`.
    pub fn from_slice(elems: &[i64], default: i64) -> Self {
        let mut a = ArrayValue::constant(default);
        for (i, &v) in elems.iter().enumerate() {
            a.set_in_place(i as i64, v);
        }
        a
    }

    pub fn get(&self, index: i64) -> i64 {
        self.entries.get(&index).copied().unwrap_or(self.default)
    }

    pub fn set_in_place(&mut self, index: i64, value: i64) {
        if value == self.default {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn with(&self, index: i64, value: i64) -> Self {
        let mut a = self.clone();
        a.set_in_place(index, value);
        a
    }

    /// Prefix `0..len` as a vector.
    pub fn prefix(&self, len: usize) -> Vec<i64> {
        (0..len as i64).map(|i| self.get(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Arc<ArrayValue>),
}

impl Value {
    pub fn default_of(sort: Sort) -> Value {
        match sort {
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(false),
            Sort::Array => Value::Array(Arc::new(ArrayValue::constant(0))),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn array(a: ArrayValue) -> Value {
        Value::Array(Arc::new(a))
    }

    /// Literal expression for scalar values.
    pub fn to_expr(&self) -> Option<Expr> {
        match self {
            Value::Int(v) => Some(Expr::Int(*v)),
            Value::Bool(b) => Some(Expr::Bool(*b)),
            Value::Array(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(a) => {
                write!(f, "[")?;
                for (n, (i, v)) in a.entries.iter().enumerate() {
                    if n > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{i}: {v}")?;
                }
                if !a.entries.is_empty() {
                    write!(f, ", ")?;
                }
                write!(f, "_: {}]", a.default)
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Array(a) => a.serialize(s),
        }
    }
}

/// Assignment of values to free variables.
pub type Valuation = BTreeMap<Symbol, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("no interpretation for function `{0}`")]
    Uninterpreted(String),
    #[error("ill-sorted value in `{0}`")]
    Sort(String),
}

/// Supplies the values of synthesis-function applications.
pub trait CallHandler {
    fn call(&self, name: &str, ret: Sort, args: &[Value], domain: &[i64]) -> Result<Value, EvalError>;
}

/// No functions interpreted; any application is an error.
pub struct NoCalls;

impl CallHandler for NoCalls {
    fn call(&self, name: &str, _: Sort, _: &[Value], _: &[i64]) -> Result<Value, EvalError> {
        Err(EvalError::Uninterpreted(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub params: Vec<(Symbol, Sort)>,
    pub body: Expr,
}

/// Interpretation of synthesis functions by their bodies.
#[derive(Debug, Clone, Default)]
pub struct Interp {
    pub funs: BTreeMap<Symbol, FunDef>,
}

impl Interp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<Symbol>, params: Vec<(Symbol, Sort)>, body: Expr) -> Self {
        self.funs.insert(name.into(), FunDef { params, body });
        self
    }
}

impl CallHandler for Interp {
    fn call(&self, name: &str, _: Sort, args: &[Value], domain: &[i64]) -> Result<Value, EvalError> {
        let def = self
            .funs
            .get(name)
            .ok_or_else(|| EvalError::Uninterpreted(name.to_string()))?;
        let vals: Valuation = def
            .params
            .iter()
            .map(|(n, _)| n.clone())
            .zip(args.iter().cloned())
            .collect();
        Evaluator::new(&vals, self, domain).eval(&def.body)
    }
}

/// Records every application encountered and answers with a default value.
#[derive(Default)]
pub struct CallRecorder {
    pub calls: RefCell<Vec<(Symbol, Vec<Value>)>>,
}

impl CallHandler for CallRecorder {
    fn call(&self, name: &str, ret: Sort, args: &[Value], _: &[i64]) -> Result<Value, EvalError> {
        let mut calls = self.calls.borrow_mut();
        let entry = (name.to_string(), args.to_vec());
        if !calls.contains(&entry) {
            calls.push(entry);
        }
        Ok(Value::default_of(ret))
    }
}

pub struct Evaluator<'a> {
    vals: &'a Valuation,
    calls: &'a dyn CallHandler,
    domain: &'a [i64],
    /// Short-circuit connectives and quantifiers.
    lazy: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(vals: &'a Valuation, calls: &'a dyn CallHandler, domain: &'a [i64]) -> Self {
        Evaluator {
            vals,
            calls,
            domain,
            lazy: true,
        }
    }

    /// Evaluate every subterm, including both sides of connectives.
    pub fn strict(mut self) -> Self {
        self.lazy = false;
        self
    }

    pub fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        self.eval_in(e, &mut Vec::new())
    }

    pub fn eval_bool(&self, e: &Expr) -> Result<bool, EvalError> {
        self.eval(e)?
            .as_bool()
            .ok_or_else(|| EvalError::Sort(e.to_string()))
    }

    pub fn eval_in(&self, e: &Expr, locals: &mut Vec<(Symbol, Value)>) -> Result<Value, EvalError> {
        match e {
            Expr::Int(v) => Ok(Value::Int(*v)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(n, _) => {
                if let Some((_, v)) = locals.iter().rev().find(|(m, _)| m == n) {
                    return Ok(v.clone());
                }
                self.vals
                    .get(n)
                    .cloned()
                    .ok_or_else(|| EvalError::Unbound(n.clone()))
            }
            Expr::App(op, args) => self.eval_app(*op, args, locals),
            Expr::Select(a, i) => {
                let a = self.eval_array(a, locals)?;
                let i = self.eval_int(i, locals)?;
                Ok(Value::Int(a.get(i)))
            }
            Expr::Store(a, i, v) => {
                let a = self.eval_array(a, locals)?;
                let i = self.eval_int(i, locals)?;
                let v = self.eval_int(v, locals)?;
                Ok(Value::array(a.with(i, v)))
            }
            Expr::Quant(k, bs, body) => self.eval_quant(*k, bs, body, locals).map(Value::Bool),
            Expr::SynthApp(f, ret, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_in(a, locals))
                    .collect::<Result<Vec<_>, _>>()?;
                self.calls.call(f, *ret, &vals, self.domain)
            }
        }
    }

    fn eval_quant(
        &self,
        kind: Quantifier,
        binders: &[Symbol],
        body: &Expr,
        locals: &mut Vec<(Symbol, Value)>,
    ) -> Result<bool, EvalError> {
        let Some((first, rest)) = binders.split_first() else {
            return self.eval_bool_in(body, locals);
        };
        let want = kind == Quantifier::Exists;
        let mut result = !want;
        for &d in self.domain {
            locals.push((first.clone(), Value::Int(d)));
            let r = self.eval_quant(kind, rest, body, locals);
            locals.pop();
            if r? == want {
                result = want;
                if self.lazy {
                    break;
                }
            }
        }
        Ok(result)
    }

    fn eval_int(&self, e: &Expr, locals: &mut Vec<(Symbol, Value)>) -> Result<i64, EvalError> {
        self.eval_in(e, locals)?
            .as_int()
            .ok_or_else(|| EvalError::Sort(e.to_string()))
    }

    fn eval_bool_in(&self, e: &Expr, locals: &mut Vec<(Symbol, Value)>) -> Result<bool, EvalError> {
        self.eval_in(e, locals)?
            .as_bool()
            .ok_or_else(|| EvalError::Sort(e.to_string()))
    }

    fn eval_array(
        &self,
        e: &Expr,
        locals: &mut Vec<(Symbol, Value)>,
    ) -> Result<Arc<ArrayValue>, EvalError> {
        match self.eval_in(e, locals)? {
            Value::Array(a) => Ok(a),
            _ => Err(EvalError::Sort(e.to_string())),
        }
    }

    fn eval_app(&self, op: Op, args: &[Expr], locals: &mut Vec<(Symbol, Value)>) -> Result<Value, EvalError> {
        let int = |i: usize, locals: &mut Vec<(Symbol, Value)>| self.eval_int(&args[i], locals);
        Ok(match op {
            Op::Add => {
                let mut s: i64 = 0;
                for a in args {
                    s = s.wrapping_add(self.eval_int(a, locals)?);
                }
                Value::Int(s)
            }
            Op::Sub => Value::Int(int(0, locals)?.wrapping_sub(int(1, locals)?)),
            Op::MulConst => Value::Int(int(0, locals)?.wrapping_mul(int(1, locals)?)),
            Op::Neg => Value::Int(int(0, locals)?.wrapping_neg()),
            Op::Le => Value::Bool(int(0, locals)? <= int(1, locals)?),
            Op::Lt => Value::Bool(int(0, locals)? < int(1, locals)?),
            Op::Ge => Value::Bool(int(0, locals)? >= int(1, locals)?),
            Op::Gt => Value::Bool(int(0, locals)? > int(1, locals)?),
            Op::Eq => Value::Bool(self.eval_in(&args[0], locals)? == self.eval_in(&args[1], locals)?),
            Op::Neq => Value::Bool(self.eval_in(&args[0], locals)? != self.eval_in(&args[1], locals)?),
            Op::And | Op::Or => {
                let want = op == Op::Or;
                let mut result = !want;
                for a in args {
                    if self.eval_bool_in(a, locals)? == want {
                        result = want;
                        if self.lazy {
                            break;
                        }
                    }
                }
                Value::Bool(result)
            }
            Op::Not => Value::Bool(!self.eval_bool_in(&args[0], locals)?),
            Op::Implies => {
                let a = self.eval_bool_in(&args[0], locals)?;
                if !a && self.lazy {
                    Value::Bool(true)
                } else {
                    let b = self.eval_bool_in(&args[1], locals)?;
                    Value::Bool(!a || b)
                }
            }
            Op::Ite => {
                let c = self.eval_bool_in(&args[0], locals)?;
                if self.lazy {
                    self.eval_in(&args[if c { 1 } else { 2 }], locals)?
                } else {
                    let t = self.eval_in(&args[1], locals)?;
                    let e = self.eval_in(&args[2], locals)?;
                    if c {
                        t
                    } else {
                        e
                    }
                }
            }
        })
    }
}

/// Index domain `0..len`.
pub fn index_domain(len: usize) -> Vec<i64> {
    (0..len as i64).collect()
}

/// Every application of a synthesis function reachable in `e` under `vals`,
/// with its argument values. Nested applications see default results.
pub fn call_sites(e: &Expr, vals: &Valuation, domain: &[i64]) -> Vec<(Symbol, Vec<Value>)> {
    let rec = CallRecorder::default();
    let _ = Evaluator::new(vals, &rec, domain).strict().eval(e);
    rec.calls.into_inner()
}

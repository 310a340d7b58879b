//! Expression trees over linear integer arithmetic, integer arrays and
//! quantification over array indices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Symbol = String;

/// Sorts of the expression language. Arrays are always `(Array Int Int)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    Int,
    Array,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Array => write!(f, "(Array Int Int)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    /// Multiplication by a constant. The first operand is always an
    /// integer literal.
    MulConst,
    Neg,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Neq,
    And,
    Or,
    Not,
    Implies,
    Ite,
}

impl Op {
    pub fn smt_name(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub | Op::Neg => "-",
            Op::MulConst => "*",
            Op::Le => "<=",
            Op::Lt => "<",
            Op::Ge => ">=",
            Op::Gt => ">",
            Op::Eq => "=",
            Op::Neq => "distinct",
            Op::And => "and",
            Op::Or => "or",
            Op::Not => "not",
            Op::Implies => "=>",
            Op::Ite => "ite",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, Op::Le | Op::Lt | Op::Ge | Op::Gt | Op::Eq | Op::Neq)
    }

    pub fn is_connective(self) -> bool {
        matches!(self, Op::And | Op::Or | Op::Not | Op::Implies)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }

    pub fn smt_name(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// An immutable expression. Quantifier binders are always `Int`-sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(Symbol, Sort),
    App(Op, Vec<Expr>),
    Select(Box<Expr>, Box<Expr>),
    Store(Box<Expr>, Box<Expr>, Box<Expr>),
    Quant(Quantifier, Vec<Symbol>, Box<Expr>),
    /// Application of a function to be synthesized, with its return sort.
    SynthApp(Symbol, Sort, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("operator `{op}` expects {expected}, got {got}")]
    Arity {
        op: &'static str,
        expected: String,
        got: usize,
    },
    #[error("sort mismatch in `{context}`: expected {expected}, found {found}")]
    Mismatch {
        context: String,
        expected: Sort,
        found: Sort,
    },
    #[error("multiplication requires a constant operand: {0}")]
    NonLinear(String),
    #[error("variable `{name}` used at sort {found} but replaced by a term of sort {expected}")]
    Substitution {
        name: String,
        expected: Sort,
        found: Sort,
    },
}

// Constructors named after the SMT-LIB operators they build.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    pub fn bool(v: bool) -> Expr {
        Expr::Bool(v)
    }

    pub fn var(name: impl Into<Symbol>, sort: Sort) -> Expr {
        Expr::Var(name.into(), sort)
    }

    pub fn int_var(name: impl Into<Symbol>) -> Expr {
        Expr::Var(name.into(), Sort::Int)
    }

    pub fn array_var(name: impl Into<Symbol>) -> Expr {
        Expr::Var(name.into(), Sort::Array)
    }

    pub fn bool_var(name: impl Into<Symbol>) -> Expr {
        Expr::Var(name.into(), Sort::Bool)
    }

    /// Conjunction; the empty conjunction is `true` and singletons are unwrapped.
    pub fn and(mut args: Vec<Expr>) -> Expr {
        match args.len() {
            0 => Expr::Bool(true),
            1 => args.pop().unwrap(),
            _ => Expr::App(Op::And, args),
        }
    }

    /// Disjunction; the empty disjunction is `false` and singletons are unwrapped.
    pub fn or(mut args: Vec<Expr>) -> Expr {
        match args.len() {
            0 => Expr::Bool(false),
            1 => args.pop().unwrap(),
            _ => Expr::App(Op::Or, args),
        }
    }

    pub fn not(e: Expr) -> Expr {
        Expr::App(Op::Not, vec![e])
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Implies, vec![a, b])
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::App(Op::Ite, vec![c, t, e])
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Eq, vec![a, b])
    }

    pub fn neq(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Neq, vec![a, b])
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Le, vec![a, b])
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Lt, vec![a, b])
    }

    pub fn ge(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Ge, vec![a, b])
    }

    pub fn gt(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Gt, vec![a, b])
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Add, vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::App(Op::Sub, vec![a, b])
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Int(v) => Expr::Int(v.wrapping_neg()),
            e => Expr::App(Op::Neg, vec![e]),
        }
    }

    /// `k * e`; rejects nothing since the coefficient is a literal by type.
    pub fn mul_const(k: i64, e: Expr) -> Expr {
        Expr::App(Op::MulConst, vec![Expr::Int(k), e])
    }

    pub fn select(a: Expr, i: Expr) -> Expr {
        Expr::Select(Box::new(a), Box::new(i))
    }

    pub fn store(a: Expr, i: Expr, v: Expr) -> Expr {
        Expr::Store(Box::new(a), Box::new(i), Box::new(v))
    }

    pub fn forall(binder: impl Into<Symbol>, body: Expr) -> Expr {
        Expr::Quant(Quantifier::Forall, vec![binder.into()], Box::new(body))
    }

    pub fn exists(binder: impl Into<Symbol>, body: Expr) -> Expr {
        Expr::Quant(Quantifier::Exists, vec![binder.into()], Box::new(body))
    }

    pub fn quant(kind: Quantifier, binders: Vec<Symbol>, body: Expr) -> Expr {
        Expr::Quant(kind, binders, Box::new(body))
    }

    pub fn synth_app(name: impl Into<Symbol>, ret: Sort, args: Vec<Expr>) -> Expr {
        Expr::SynthApp(name.into(), ret, args)
    }

    /// The sort of this node, assuming it is well-sorted.
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Int(_) => Sort::Int,
            Expr::Bool(_) => Sort::Bool,
            Expr::Var(_, s) => *s,
            Expr::App(op, args) => match op {
                Op::Add | Op::Sub | Op::MulConst | Op::Neg => Sort::Int,
                Op::Ite => args.get(1).map(Expr::sort).unwrap_or(Sort::Bool),
                _ => Sort::Bool,
            },
            Expr::Select(..) => Sort::Int,
            Expr::Store(..) => Sort::Array,
            Expr::Quant(..) => Sort::Bool,
            Expr::SynthApp(_, s, _) => *s,
        }
    }

    /// Check sort-correctness of the whole tree and return its sort.
    pub fn typecheck(&self) -> Result<Sort, SortError> {
        match self {
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Var(_, s) => Ok(*s),
            Expr::App(op, args) => {
                let sorts = args
                    .iter()
                    .map(Expr::typecheck)
                    .collect::<Result<Vec<_>, _>>()?;
                check_app(*op, args, &sorts)
            }
            Expr::Select(a, i) => {
                expect(a.typecheck()?, Sort::Array, "select")?;
                expect(i.typecheck()?, Sort::Int, "select")?;
                Ok(Sort::Int)
            }
            Expr::Store(a, i, v) => {
                expect(a.typecheck()?, Sort::Array, "store")?;
                expect(i.typecheck()?, Sort::Int, "store")?;
                expect(v.typecheck()?, Sort::Int, "store")?;
                Ok(Sort::Array)
            }
            Expr::Quant(kind, _, body) => {
                expect(body.typecheck()?, Sort::Bool, kind.smt_name())?;
                Ok(Sort::Bool)
            }
            Expr::SynthApp(_, ret, args) => {
                for a in args {
                    a.typecheck()?;
                }
                Ok(*ret)
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        !self.any(&mut |e| matches!(e, Expr::Quant(..)))
    }

    pub fn contains_synth_app(&self) -> bool {
        self.any(&mut |e| matches!(e, Expr::SynthApp(..)))
    }

    /// Immediate children in left-to-right order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => Vec::new(),
            Expr::App(_, args) | Expr::SynthApp(_, _, args) => args.iter().collect(),
            Expr::Select(a, i) => vec![a, i],
            Expr::Store(a, i, v) => vec![a, i, v],
            Expr::Quant(_, _, body) => vec![body],
        }
    }

    /// Rebuild this node with each child replaced by `f(child)`.
    pub fn map_children<E>(&self, mut f: impl FnMut(&Expr) -> Result<Expr, E>) -> Result<Expr, E> {
        Ok(match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => self.clone(),
            Expr::App(op, args) => {
                Expr::App(*op, args.iter().map(&mut f).collect::<Result<_, _>>()?)
            }
            Expr::SynthApp(n, s, args) => Expr::SynthApp(
                n.clone(),
                *s,
                args.iter().map(&mut f).collect::<Result<_, _>>()?,
            ),
            Expr::Select(a, i) => Expr::Select(Box::new(f(a)?), Box::new(f(i)?)),
            Expr::Store(a, i, v) => {
                Expr::Store(Box::new(f(a)?), Box::new(f(i)?), Box::new(f(v)?))
            }
            Expr::Quant(k, bs, body) => Expr::Quant(*k, bs.clone(), Box::new(f(body)?)),
        })
    }

    /// Pre-order search for a node satisfying `pred`.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    /// Pre-order visit of every node.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Expr::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Expr::Bool(v) => Some(*v),
            _ => None,
        }
    }
}

fn expect(found: Sort, expected: Sort, context: &str) -> Result<(), SortError> {
    if found == expected {
        Ok(())
    } else {
        Err(SortError::Mismatch {
            context: context.to_string(),
            expected,
            found,
        })
    }
}

fn arity(op: Op, expected: &str, got: usize) -> SortError {
    SortError::Arity {
        op: op.smt_name(),
        expected: expected.to_string(),
        got,
    }
}

fn check_app(op: Op, args: &[Expr], sorts: &[Sort]) -> Result<Sort, SortError> {
    let name = op.smt_name();
    let all = |s: Sort| -> Result<(), SortError> {
        sorts.iter().try_for_each(|&found| expect(found, s, name))
    };
    match op {
        Op::Add => {
            if sorts.len() < 2 {
                return Err(arity(op, "at least 2 arguments", sorts.len()));
            }
            all(Sort::Int)?;
            Ok(Sort::Int)
        }
        Op::Sub => {
            if sorts.len() != 2 {
                return Err(arity(op, "2 arguments", sorts.len()));
            }
            all(Sort::Int)?;
            Ok(Sort::Int)
        }
        Op::MulConst => {
            if sorts.len() != 2 {
                return Err(arity(op, "2 arguments", sorts.len()));
            }
            all(Sort::Int)?;
            if !matches!(args[0], Expr::Int(_)) {
                return Err(SortError::NonLinear(format!(
                    "(* {} {})",
                    args[0], args[1]
                )));
            }
            Ok(Sort::Int)
        }
        Op::Neg => {
            if sorts.len() != 1 {
                return Err(arity(op, "1 argument", sorts.len()));
            }
            all(Sort::Int)?;
            Ok(Sort::Int)
        }
        Op::Le | Op::Lt | Op::Ge | Op::Gt => {
            if sorts.len() != 2 {
                return Err(arity(op, "2 arguments", sorts.len()));
            }
            all(Sort::Int)?;
            Ok(Sort::Bool)
        }
        Op::Eq | Op::Neq => {
            if sorts.len() != 2 {
                return Err(arity(op, "2 arguments", sorts.len()));
            }
            expect(sorts[1], sorts[0], name)?;
            Ok(Sort::Bool)
        }
        Op::And | Op::Or => {
            if sorts.len() < 2 {
                return Err(arity(op, "at least 2 arguments", sorts.len()));
            }
            all(Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Op::Not => {
            if sorts.len() != 1 {
                return Err(arity(op, "1 argument", sorts.len()));
            }
            all(Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Op::Implies => {
            if sorts.len() != 2 {
                return Err(arity(op, "2 arguments", sorts.len()));
            }
            all(Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Op::Ite => {
            if sorts.len() != 3 {
                return Err(arity(op, "3 arguments", sorts.len()));
            }
            expect(sorts[0], Sort::Bool, name)?;
            expect(sorts[2], sorts[1], name)?;
            Ok(sorts[1])
        }
    }
}

/// Prints SMT-LIB / SyGuS-IF surface syntax.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) if *v < 0 => write!(f, "(- {})", v.unsigned_abs()),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(n, _) => write!(f, "{n}"),
            Expr::App(op, args) => {
                write!(f, "({}", op.smt_name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Expr::Select(a, i) => write!(f, "(select {a} {i})"),
            Expr::Store(a, i, v) => write!(f, "(store {a} {i} {v})"),
            Expr::Quant(k, bs, body) => {
                write!(f, "({} (", k.smt_name())?;
                for (n, b) in bs.iter().enumerate() {
                    if n > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({b} Int)")?;
                }
                write!(f, ") {body})")
            }
            Expr::SynthApp(n, _, args) => {
                if args.is_empty() {
                    return write!(f, "{n}");
                }
                write!(f, "({n}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typecheck_rejects_ill_sorted_apply() {
        let e = Expr::add(Expr::int(1), Expr::bool(true));
        assert!(matches!(e.typecheck(), Err(SortError::Mismatch { .. })));
        let e = Expr::App(Op::MulConst, vec![Expr::int_var("x"), Expr::int_var("y")]);
        assert!(matches!(e.typecheck(), Err(SortError::NonLinear(_))));
    }

    #[test]
    fn display_uses_smtlib_syntax() {
        let e = Expr::forall(
            "i",
            Expr::ge(Expr::select(Expr::array_var("A"), Expr::int_var("i")), Expr::int(-1)),
        );
        assert_eq!(e.to_string(), "(forall ((i Int)) (>= (select A i) (- 1)))");
        assert_eq!(e.typecheck(), Ok(Sort::Bool));
    }
}

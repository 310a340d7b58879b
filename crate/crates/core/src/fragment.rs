//! Membership in the array property fragment, and finite instantiation of
//! its universal quantifiers over the index set of a formula.
//!
//! Quantifiers are classified by polarity: `forall` in a positive position
//! and `exists` in a negative one both act universally. A quantifier below
//! a Boolean `=`, `distinct`, an `ite` condition or a function argument
//! occurs in both polarities.

use serde::Serialize;
use thiserror::Error;

use crate::ast::{desugar_binders, free_names, simplify, substitute, all_symbols, Expr, FreshNames, Op, Quantifier, Sort, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Pos,
    Neg,
    Both,
}

impl Polarity {
    fn flip(self) -> Self {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
            Polarity::Both => Polarity::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Effective {
    Universal,
    Existential,
    Mixed,
}

fn effective(kind: Quantifier, pol: Polarity) -> Effective {
    match (kind, pol) {
        (_, Polarity::Both) => Effective::Mixed,
        (Quantifier::Forall, Polarity::Pos) | (Quantifier::Exists, Polarity::Neg) => Effective::Universal,
        _ => Effective::Existential,
    }
}

/// Children of `e` with the polarity each one occurs in.
fn child_polarities(e: &Expr, pol: Polarity) -> Vec<(usize, &Expr, Polarity)> {
    match e {
        Expr::App(Op::Not, args) => vec![(0, &args[0], pol.flip())],
        Expr::App(Op::Implies, args) => vec![(0, &args[0], pol.flip()), (1, &args[1], pol)],
        Expr::App(Op::And | Op::Or, args) => args.iter().enumerate().map(|(i, c)| (i, c, pol)).collect(),
        Expr::App(Op::Ite, args) if args[1].sort() == Sort::Bool => {
            vec![(0, &args[0], Polarity::Both), (1, &args[1], pol), (2, &args[2], pol)]
        }
        Expr::Quant(_, _, body) => vec![(0, body.as_ref(), pol)],
        _ => e
            .children()
            .into_iter()
            .enumerate()
            .map(|(i, c)| (i, c, Polarity::Both))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Child positions from the root, dot-separated; empty for the root.
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    pub in_fragment: bool,
    pub violations: Vec<Violation>,
    /// Guard of the first universal block, in universal form.
    pub index_guard: Option<Expr>,
    /// Value constraint of the first universal block, in universal form.
    pub value_constraint: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("existential at {path} cannot be skolemized to a constant: {reason}")]
    NotSkolemizable { path: String, reason: String },
    #[error("cannot instantiate universal quantifiers over an empty index set")]
    EmptyIndexSet,
}

/// Finite set of index terms, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct IndexSet {
    pub terms: Vec<Expr>,
}

impl IndexSet {
    pub fn insert(&mut self, t: Expr) {
        if !self.terms.contains(&t) {
            self.terms.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, t: &Expr) -> bool {
        self.terms.contains(t)
    }
}

/// A universal block split into guard and value constraint, both stated for
/// the universal reading of the quantifier.
struct Block {
    binders: Vec<Symbol>,
    guard: Option<Expr>,
    value: Expr,
    /// Polarity of `value` as it appears in the formula.
    value_pol: Polarity,
}

/// Collect the run of same-kind single binders starting at `e` and split
/// its body. `e` must be an effectively universal quantifier.
fn universal_block(e: &Expr, pol: Polarity) -> Block {
    let Expr::Quant(kind, bs, body) = e else { unreachable!() };
    let mut binders = bs.clone();
    let mut body: &Expr = body;
    while let Expr::Quant(k, more, inner) = body {
        if k != kind {
            break;
        }
        binders.extend(more.iter().cloned());
        body = inner;
    }
    let mentions = |g: &Expr| free_names(g).iter().any(|n| binders.contains(n));
    match (kind, body) {
        (Quantifier::Forall, Expr::App(Op::Implies, args)) => Block {
            guard: Some(args[0].clone()),
            value: args[1].clone(),
            value_pol: pol,
            binders,
        },
        (Quantifier::Exists, Expr::App(Op::And, args)) => {
            let (guard, rest): (Vec<Expr>, Vec<Expr>) = args
                .iter()
                .cloned()
                .partition(|a| mentions(a) && is_guard_shape(a));
            if guard.is_empty() || rest.is_empty() {
                return Block {
                    binders,
                    guard: None,
                    value: body.clone(),
                    value_pol: pol,
                };
            }
            Block {
                guard: Some(Expr::and(guard)),
                value: Expr::and(rest),
                value_pol: pol,
                binders,
            }
        }
        _ => Block {
            binders,
            guard: None,
            value: body.clone(),
            value_pol: pol,
        },
    }
}

/// Boolean structure over integer comparisons, without array reads.
fn is_guard_shape(g: &Expr) -> bool {
    match g {
        Expr::Bool(_) => true,
        Expr::App(Op::And | Op::Or, xs) => xs.iter().all(is_guard_shape),
        Expr::App(Op::Not, xs) => xs[0].sort() == Sort::Bool && is_comparison_atom(&xs[0]),
        _ => is_comparison_atom(g),
    }
}

fn is_comparison_atom(g: &Expr) -> bool {
    match g {
        Expr::App(op, xs) if op.is_comparison() => {
            xs[0].sort() == Sort::Int && !xs.iter().any(|x| x.any(&mut |s| matches!(s, Expr::Select(..))))
        }
        _ => false,
    }
}

fn path_string(path: &[usize]) -> String {
    path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

pub fn classify_array_property(e: &Expr) -> FragmentReport {
    let mut c = Classifier::default();
    c.walk(&desugar_binders(e), Polarity::Pos, &mut Vec::new(), &[], false);
    FragmentReport {
        in_fragment: c.violations.is_empty(),
        violations: c.violations,
        index_guard: c.index_guard,
        value_constraint: c.value_constraint,
    }
}

#[derive(Default)]
struct Classifier {
    violations: Vec<Violation>,
    index_guard: Option<Expr>,
    value_constraint: Option<Expr>,
    seen_block: bool,
}

impl Classifier {
    fn violation(&mut self, path: &[usize], reason: impl Into<String>) {
        self.violations.push(Violation {
            path: path_string(path),
            reason: reason.into(),
        });
    }

    /// `univ` holds the variables of enclosing universal blocks.
    fn walk(&mut self, e: &Expr, pol: Polarity, path: &mut Vec<usize>, univ: &[Symbol], under_univ: bool) {
        match e {
            Expr::Var(v, _) if univ.contains(v) => {
                self.violation(path, format!("quantified variable `{v}` used outside an array read"));
            }
            Expr::Select(a, i) => {
                path.push(0);
                self.walk(a, pol, path, univ, under_univ);
                path.pop();
                let direct = matches!(i.as_ref(), Expr::Var(v, _) if univ.contains(v));
                if !direct {
                    let names = free_names(i);
                    if let Some(v) = univ.iter().find(|v| names.contains(*v)) {
                        path.push(1);
                        self.violation(path, format!("arithmetic on quantified index `{v}`"));
                        path.pop();
                    } else {
                        path.push(1);
                        self.walk(i, Polarity::Both, path, univ, under_univ);
                        path.pop();
                    }
                }
            }
            Expr::Quant(kind, _, _) => match effective(*kind, pol) {
                Effective::Mixed => {
                    self.violation(path, "quantifier occurs in both polarities");
                }
                Effective::Existential => {
                    if under_univ {
                        self.violation(path, "quantifier alternation under a universal quantifier");
                    }
                    path.push(0);
                    let Expr::Quant(_, _, body) = e else { unreachable!() };
                    self.walk(body, pol, path, univ, under_univ);
                    path.pop();
                }
                Effective::Universal => self.block(e, pol, path, univ),
            },
            _ => {
                for (i, c, p) in child_polarities(e, pol) {
                    path.push(i);
                    self.walk(c, p, path, univ, under_univ);
                    path.pop();
                }
            }
        }
    }

    fn block(&mut self, e: &Expr, pol: Polarity, path: &mut Vec<usize>, univ: &[Symbol]) {
        let block = universal_block(e, pol);
        let mut inner: Vec<Symbol> = univ.to_vec();
        inner.extend(block.binders.iter().cloned());
        if let Some(g) = &block.guard {
            if let Err(reason) = check_guard(g, &block.binders, &inner) {
                self.violation(path, format!("index guard: {reason}"));
            }
        }
        if !self.seen_block {
            self.seen_block = true;
            let negate = block.value_pol == Polarity::Neg;
            self.index_guard = Some(block.guard.clone().unwrap_or(Expr::Bool(true)));
            self.value_constraint = Some(if negate { Expr::not(block.value.clone()) } else { block.value.clone() });
        }
        self.walk(&block.value, block.value_pol, path, &inner, true);
    }
}

/// Check `g` against the index guard grammar. Comparisons may be any of
/// `<=`, `<`, `>=`, `>`, `=`, `distinct`, since each reduces to `<=` and `=`
/// over integers.
fn check_guard(g: &Expr, block: &[Symbol], univ: &[Symbol]) -> Result<(), String> {
    match g {
        Expr::Bool(true) => Ok(()),
        Expr::App(Op::And | Op::Or, xs) => xs.iter().try_for_each(|x| check_guard(x, block, univ)),
        Expr::App(Op::Not, xs) if is_comparison_atom(&xs[0]) => check_guard(&xs[0], block, univ),
        Expr::App(op, xs) if op.is_comparison() && xs[0].sort() == Sort::Int => {
            for x in xs {
                check_iterm(x, block, univ)?;
            }
            Ok(())
        }
        other => Err(format!("`{other}` is not an index guard")),
    }
}

fn check_iterm(t: &Expr, block: &[Symbol], univ: &[Symbol]) -> Result<(), String> {
    if let Expr::Var(v, _) = t {
        if block.contains(v) {
            return Ok(());
        }
    }
    check_term(t, univ)
}

fn check_term(t: &Expr, univ: &[Symbol]) -> Result<(), String> {
    match t {
        Expr::Int(_) => Ok(()),
        Expr::Var(v, Sort::Int) if univ.contains(v) => {
            Err(format!("quantified variable `{v}` inside an index term"))
        }
        Expr::Var(_, Sort::Int) => Ok(()),
        Expr::App(Op::Add | Op::Sub | Op::Neg, xs) => xs.iter().try_for_each(|x| check_term(x, univ)),
        Expr::App(Op::MulConst, xs) => check_term(&xs[1], univ),
        other => Err(format!("`{other}` is not an index term")),
    }
}

/// Replace existentials that are not under a universal by fresh constants.
pub fn skolemize(e: &Expr) -> Result<Expr, FragmentError> {
    let mut fresh = FreshNames::new();
    skolemize_with(e, &mut fresh).map(|(out, _)| out)
}

/// As `skolemize`, also returning the introduced names.
pub fn skolemize_with(e: &Expr, fresh: &mut FreshNames) -> Result<(Expr, Vec<Symbol>), FragmentError> {
    let avoid = all_symbols(e);
    let mut introduced = Vec::new();
    let out = skolem_rec(&desugar_binders(e), Polarity::Pos, false, &mut Vec::new(), fresh, &avoid, &mut introduced)?;
    Ok((out, introduced))
}

fn skolem_rec(
    e: &Expr,
    pol: Polarity,
    under_univ: bool,
    path: &mut Vec<usize>,
    fresh: &mut FreshNames,
    avoid: &std::collections::BTreeSet<Symbol>,
    introduced: &mut Vec<Symbol>,
) -> Result<Expr, FragmentError> {
    let fail = |path: &[usize], reason: &str| FragmentError::NotSkolemizable {
        path: path_string(path),
        reason: reason.to_string(),
    };
    if e.is_quantifier_free() {
        return Ok(e.clone());
    }
    match e {
        Expr::Quant(kind, bs, body) => match effective(*kind, pol) {
            Effective::Mixed => Err(fail(path, "quantifier occurs in both polarities")),
            Effective::Existential if under_univ => Err(fail(path, "existential under a universal needs a function")),
            Effective::Existential => {
                let z = fresh.next_avoiding(avoid);
                introduced.push(z.clone());
                let body = substitute(body, &bs[0], &Expr::int_var(z)).expect("binders are Int");
                skolem_rec(&body, pol, false, path, fresh, avoid, introduced)
            }
            Effective::Universal => {
                path.push(0);
                let body = skolem_rec(body, pol, true, path, fresh, avoid, introduced)?;
                path.pop();
                Ok(Expr::Quant(*kind, bs.clone(), Box::new(body)))
            }
        },
        _ => {
            let kids = child_polarities(e, pol);
            let mut out = Vec::with_capacity(kids.len());
            for (i, c, p) in kids {
                path.push(i);
                out.push(skolem_rec(c, p, under_univ, path, fresh, avoid, introduced)?);
                path.pop();
            }
            let mut it = out.into_iter();
            Ok(e.map_children::<()>(|_| Ok(it.next().unwrap())).unwrap())
        }
    }
}

/// Array index terms and sides of universal index guards that mention no
/// quantified variable.
pub fn index_terms(e: &Expr) -> IndexSet {
    let mut out = IndexSet::default();
    collect_terms(&desugar_binders(e), Polarity::Pos, &mut Vec::new(), &mut out);
    out
}

fn collect_terms(e: &Expr, pol: Polarity, bound: &mut Vec<Symbol>, out: &mut IndexSet) {
    let closed = |t: &Expr, bound: &[Symbol]| !free_names(t).iter().any(|n| bound.contains(n));
    match e {
        Expr::Select(a, i) | Expr::Store(a, i, _) => {
            collect_terms(a, pol, bound, out);
            collect_terms(i, Polarity::Both, bound, out);
            if closed(i, bound) {
                out.insert((**i).clone());
            }
            if let Expr::Store(_, _, v) = e {
                collect_terms(v, Polarity::Both, bound, out);
            }
        }
        Expr::Quant(kind, bs, body) => {
            let len = bound.len();
            if effective(*kind, pol) == Effective::Universal {
                let block = universal_block(e, pol);
                bound.extend(block.binders.iter().cloned());
                if let Some(g) = &block.guard {
                    guard_sides(g, bound, out);
                }
                collect_terms(&block.value, block.value_pol, bound, out);
            } else {
                bound.extend(bs.iter().cloned());
                collect_terms(body, pol, bound, out);
            }
            bound.truncate(len);
        }
        _ => {
            for (_, c, p) in child_polarities(e, pol) {
                collect_terms(c, p, bound, out);
            }
        }
    }
}

fn guard_sides(g: &Expr, bound: &[Symbol], out: &mut IndexSet) {
    match g {
        Expr::App(Op::And | Op::Or | Op::Not, xs) => xs.iter().for_each(|x| guard_sides(x, bound, out)),
        Expr::App(op, xs) if op.is_comparison() && xs[0].sort() == Sort::Int => {
            for x in xs {
                if !free_names(x).iter().any(|n| bound.contains(n)) {
                    out.insert(x.clone());
                }
            }
        }
        _ => {}
    }
}

/// Replace each universal quantifier by the conjunction of its instances
/// over `r`, then simplify.
pub fn instantiate_universals(e: &Expr, r: &IndexSet) -> Result<Expr, FragmentError> {
    if r.is_empty() {
        return Err(FragmentError::EmptyIndexSet);
    }
    Ok(simplify(&inst_rec(&desugar_binders(e), Polarity::Pos, r)))
}

fn inst_rec(e: &Expr, pol: Polarity, r: &IndexSet) -> Expr {
    if e.is_quantifier_free() {
        return e.clone();
    }
    match e {
        Expr::Quant(kind, bs, body) => {
            let body = inst_rec(body, pol, r);
            if effective(*kind, pol) != Effective::Universal {
                return Expr::Quant(*kind, bs.clone(), Box::new(body));
            }
            let parts: Vec<Expr> = r
                .terms
                .iter()
                .map(|t| substitute(&body, &bs[0], t).expect("index terms are Int"))
                .collect();
            match kind {
                Quantifier::Forall => Expr::and(parts),
                Quantifier::Exists => Expr::or(parts),
            }
        }
        _ => {
            let kids = child_polarities(e, pol);
            let mut out = kids.into_iter().map(|(_, c, p)| inst_rec(c, p, r));
            e.map_children::<()>(|_| Ok(out.next().unwrap())).unwrap()
        }
    }
}

//! Restriction of a specification to arrays of `b` elements and removal of
//! the then-finite quantifiers.
//!
//! Every array index term is guarded by `0 <= t && t < b`. A term that
//! mentions a quantified variable is guarded at the innermost quantifier
//! binding one of its variables (by implication under `forall`, by
//! conjunction under `exists`); the remaining terms are guarded by an
//! implication around the whole constraint.

use serde::Serialize;

use crate::ast::{
    desugar_binders, free_names, simplify, substitute, Expr, Problem, Quantifier, Symbol,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundConfig {
    pub b_start: usize,
    pub b_max: usize,
    pub step: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            b_start: 2,
            b_max: 8,
            step: 1,
        }
    }
}

impl BoundConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.b_start == 0 || self.step == 0 {
            return Err("bounds and step must be positive".into());
        }
        if self.b_start > self.b_max {
            return Err(format!("b_start {} exceeds b_max {}", self.b_start, self.b_max));
        }
        Ok(())
    }

    /// `b_start, b_start + step, ...` below `b_max`, then `b_max` itself.
    pub fn schedule(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut b = self.b_start;
        while b < self.b_max {
            out.push(b);
            b += self.step.max(1);
        }
        out.push(self.b_max);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedProblem {
    pub base: Problem,
    pub bound: usize,
    /// Quantifier-free.
    pub constraints: Vec<Expr>,
}

impl BoundedProblem {
    /// The base problem with its constraints replaced by the bounded ones.
    pub fn to_problem(&self) -> Problem {
        Problem {
            constraints: self.constraints.clone(),
            ..self.base.clone()
        }
    }
}

/// `0 <= t && t < b`.
pub fn index_guard(t: &Expr, b: usize) -> Expr {
    Expr::and(vec![
        Expr::le(Expr::int(0), t.clone()),
        Expr::lt(t.clone(), Expr::int(b as i64)),
    ])
}

/// Guard the quantifiers of `e` and return the index terms left for the
/// caller to guard, in first-occurrence order. Multi-variable binders must
/// already be desugared.
pub fn bound_quantification(e: &Expr, b: usize) -> (Expr, Vec<Expr>) {
    let mut pending = Vec::new();
    let out = bound_rec(e, b, &mut pending);
    (out, pending)
}

fn push_unique(pending: &mut Vec<Expr>, t: &Expr) {
    if !pending.contains(t) {
        pending.push(t.clone());
    }
}

fn bound_rec(e: &Expr, b: usize, pending: &mut Vec<Expr>) -> Expr {
    match e {
        Expr::Select(a, i) => {
            let out = Expr::select(bound_rec(a, b, pending), bound_rec(i, b, pending));
            push_unique(pending, i);
            out
        }
        Expr::Store(a, i, v) => {
            let out = Expr::store(
                bound_rec(a, b, pending),
                bound_rec(i, b, pending),
                bound_rec(v, b, pending),
            );
            push_unique(pending, i);
            out
        }
        Expr::Quant(k, bs, body) => {
            let mut inner = Vec::new();
            let body = bound_rec(body, b, &mut inner);
            let (captured, rest): (Vec<Expr>, Vec<Expr>) = inner
                .into_iter()
                .partition(|t| free_names(t).iter().any(|n| bs.contains(n)));
            for t in &rest {
                push_unique(pending, t);
            }
            if captured.is_empty() {
                return Expr::Quant(*k, bs.clone(), Box::new(body));
            }
            let guard = Expr::and(captured.iter().map(|t| index_guard(t, b)).collect());
            let body = match k {
                Quantifier::Forall => Expr::implies(guard, body),
                Quantifier::Exists => Expr::and(vec![guard, body]),
            };
            Expr::Quant(*k, bs.clone(), Box::new(body))
        }
        _ => e
            .map_children::<()>(|c| Ok(bound_rec(c, b, pending)))
            .unwrap(),
    }
}

/// Replace every quantifier by the conjunction (`forall`) or disjunction
/// (`exists`) of its body instantiated at `0..b`, then simplify.
pub fn remove_quantifiers(e: &Expr, b: usize) -> Expr {
    simplify(&remove_rec(&desugar_binders(e), b))
}

fn remove_rec(e: &Expr, b: usize) -> Expr {
    match e {
        Expr::Quant(k, bs, body) => {
            let body = remove_rec(body, b);
            let var: &Symbol = &bs[0];
            let parts: Vec<Expr> = (0..b as i64)
                .map(|i| simplify(&substitute(&body, var, &Expr::int(i)).expect("binders are Int")))
                .collect();
            match k {
                Quantifier::Forall => Expr::and(parts),
                Quantifier::Exists => Expr::or(parts),
            }
        }
        _ => e.map_children::<()>(|c| Ok(remove_rec(c, b))).unwrap(),
    }
}

/// The bounded, quantifier-free form of one constraint.
pub fn restrict_constraint(c: &Expr, b: usize) -> Expr {
    let (body, free) = bound_quantification(&desugar_binders(c), b);
    let guarded = if free.is_empty() {
        body
    } else {
        let guard = Expr::and(free.iter().map(|t| index_guard(t, b)).collect());
        Expr::implies(guard, body)
    };
    remove_quantifiers(&guarded, b)
}

pub fn restrict_spec(p: &Problem, b: usize) -> BoundedProblem {
    BoundedProblem {
        base: p.clone(),
        bound: b,
        constraints: p.constraints.iter().map(|c| restrict_constraint(c, b)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: Expr) -> Expr {
        Expr::select(Expr::array_var("A"), i)
    }

    #[test]
    fn guards_universal_reads() {
        let i = Expr::int_var("i");
        let e = Expr::forall("i", Expr::ge(a(i.clone()), Expr::int(0)));
        let (out, free) = bound_quantification(&e, 2);
        let want = Expr::forall(
            "i",
            Expr::implies(index_guard(&i, 2), Expr::ge(a(i.clone()), Expr::int(0))),
        );
        assert_eq!(out, want);
        assert!(free.is_empty());
    }

    #[test]
    fn records_free_index_terms() {
        let e = Expr::eq(a(Expr::int_var("x")), Expr::select(Expr::array_var("B"), Expr::int_var("y")));
        let (out, free) = bound_quantification(&e, 2);
        assert_eq!(out, e);
        assert_eq!(free, vec![Expr::int_var("x"), Expr::int_var("y")]);
        let c = Expr::gt(Expr::int_var("c"), Expr::int(0));
        assert_eq!(bound_quantification(&c, 2), (c.clone(), vec![]));
        assert_eq!(restrict_constraint(&c, 2), c);
    }

    #[test]
    fn existentials_expand_to_disjunctions() {
        let e = Expr::exists("i", Expr::eq(a(Expr::int_var("i")), Expr::int(5)));
        let want = Expr::or(vec![
            Expr::eq(a(Expr::int(0)), Expr::int(5)),
            Expr::eq(a(Expr::int(1)), Expr::int(5)),
        ]);
        assert_eq!(restrict_constraint(&e, 2), want);
    }

    #[test]
    fn empty_range_yields_units() {
        let i = Expr::int_var("i");
        let all = Expr::forall("i", Expr::ge(a(i.clone()), Expr::int(0)));
        let some = Expr::exists("i", Expr::ge(a(i), Expr::int(0)));
        assert_eq!(remove_quantifiers(&all, 0), Expr::bool(true));
        assert_eq!(remove_quantifiers(&some, 0), Expr::bool(false));
    }

    #[test]
    fn out_of_range_constant_reads_are_vacuous() {
        let e = Expr::eq(a(Expr::int(99)), Expr::int(1));
        assert_eq!(restrict_constraint(&e, 2), Expr::bool(true));
        assert_eq!(restrict_constraint(&e, 100), e);
    }

    #[test]
    fn compound_index_terms_are_guarded_at_their_binder() {
        let z = Expr::int_var("z");
        let z1 = Expr::add(z.clone(), Expr::int(1));
        let e = Expr::forall("z", Expr::lt(a(z.clone()), a(z1)));
        let want = Expr::lt(a(Expr::int(0)), a(Expr::int(1)));
        let want = Expr::and(vec![want, Expr::lt(a(Expr::int(1)), a(Expr::int(2)))]);
        assert_eq!(restrict_constraint(&e, 3), want);
    }

    #[test]
    fn schedule_ends_at_the_maximum() {
        let cfg = BoundConfig { b_start: 1, b_max: 2, step: 1 };
        assert_eq!(cfg.schedule(), vec![1, 2]);
        let cfg = BoundConfig { b_start: 2, b_max: 7, step: 2 };
        assert_eq!(cfg.schedule(), vec![2, 4, 6, 7]);
        assert_eq!(BoundConfig::default().schedule().len(), 7);
    }
}

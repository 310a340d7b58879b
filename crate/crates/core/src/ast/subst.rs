//! Variables, capture-avoiding substitution and fresh names.

use std::collections::{BTreeMap, BTreeSet};

use super::expr::{Expr, Op, Sort, SortError, Symbol};

/// Prefix reserved for generated symbols. Parsed input may not use it.
pub const FRESH_PREFIX: &str = "z!";

/// Monotone generator of `z!0, z!1, ...`.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: usize) -> Self {
        Self { next }
    }

    pub fn next_name(&mut self) -> Symbol {
        let name = format!("{FRESH_PREFIX}{}", self.next);
        self.next += 1;
        name
    }

    /// Next name that does not occur in `avoid`.
    pub fn next_avoiding(&mut self, avoid: &BTreeSet<Symbol>) -> Symbol {
        loop {
            let n = self.next_name();
            if !avoid.contains(&n) {
                return n;
            }
        }
    }
}

/// Variables occurring free in `e`, with their sorts.
pub fn free_variables(e: &Expr) -> BTreeSet<(Symbol, Sort)> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<Symbol>, out: &mut BTreeSet<(Symbol, Sort)>) {
    match e {
        Expr::Var(n, s) => {
            if !bound.contains(n) {
                out.insert((n.clone(), *s));
            }
        }
        Expr::Quant(_, bs, body) => {
            let len = bound.len();
            bound.extend(bs.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(len);
        }
        _ => {
            for c in e.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub fn free_names(e: &Expr) -> BTreeSet<Symbol> {
    free_variables(e).into_iter().map(|(n, _)| n).collect()
}

/// Every symbol mentioned anywhere in `e`: variables, binders and
/// synthesis-function names.
pub fn all_symbols(e: &Expr) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    e.visit(&mut |n| match n {
        Expr::Var(s, _) => {
            out.insert(s.clone());
        }
        Expr::Quant(_, bs, _) => out.extend(bs.iter().cloned()),
        Expr::SynthApp(f, _, _) => {
            out.insert(f.clone());
        }
        _ => {}
    });
    out
}

/// Sort at which `var` occurs free in `e`, if it does.
pub fn free_sort_of(e: &Expr, var: &str) -> Option<Sort> {
    free_variables(e)
        .into_iter()
        .find(|(n, _)| n == var)
        .map(|(_, s)| s)
}

/// Replace every free occurrence of `var` in `e` by `term`, renaming binders
/// of `e` that would capture free symbols of `term`.
pub fn substitute(e: &Expr, var: &str, term: &Expr) -> Result<Expr, SortError> {
    if let Some(found) = free_sort_of(e, var) {
        let expected = term.sort();
        if found != expected {
            return Err(SortError::Substitution {
                name: var.to_string(),
                expected,
                found,
            });
        }
    } else {
        return Ok(e.clone());
    }
    let term_free = free_names(term);
    Ok(subst_rec(e, var, term, &term_free))
}

/// Simultaneous substitution of several variables.
pub fn substitute_all(e: &Expr, map: &BTreeMap<Symbol, Expr>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let mut avoid = BTreeSet::new();
    for t in map.values() {
        avoid.extend(free_names(t));
    }
    subst_many(e, map, &avoid)
}

fn subst_rec(e: &Expr, var: &str, term: &Expr, term_free: &BTreeSet<Symbol>) -> Expr {
    match e {
        Expr::Var(n, _) if n == var => term.clone(),
        Expr::Quant(k, bs, body) => {
            if bs.iter().any(|b| b == var) {
                return e.clone();
            }
            let (bs, body) = rename_capturing(bs, body, term_free);
            Expr::Quant(*k, bs, Box::new(subst_rec(&body, var, term, term_free)))
        }
        _ => e
            .map_children::<()>(|c| Ok(subst_rec(c, var, term, term_free)))
            .unwrap(),
    }
}

fn subst_many(e: &Expr, map: &BTreeMap<Symbol, Expr>, avoid: &BTreeSet<Symbol>) -> Expr {
    match e {
        Expr::Var(n, _) => map.get(n).cloned().unwrap_or_else(|| e.clone()),
        Expr::Quant(k, bs, body) => {
            let inner: BTreeMap<Symbol, Expr> = map
                .iter()
                .filter(|(v, _)| !bs.contains(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect();
            if inner.is_empty() {
                return e.clone();
            }
            let (bs, body) = rename_capturing(bs, body, avoid);
            Expr::Quant(*k, bs, Box::new(subst_many(&body, &inner, avoid)))
        }
        _ => e
            .map_children::<()>(|c| Ok(subst_many(c, map, avoid)))
            .unwrap(),
    }
}

/// Rename binders in `bs` that clash with `avoid`.
fn rename_capturing(bs: &[Symbol], body: &Expr, avoid: &BTreeSet<Symbol>) -> (Vec<Symbol>, Expr) {
    if !bs.iter().any(|b| avoid.contains(b)) {
        return (bs.to_vec(), body.clone());
    }
    let mut used = all_symbols(body);
    used.extend(avoid.iter().cloned());
    used.extend(bs.iter().cloned());
    let mut new_bs = Vec::with_capacity(bs.len());
    let mut body = body.clone();
    for b in bs {
        if avoid.contains(b) {
            let mut k = 1;
            let fresh = loop {
                let cand = format!("{b}!{k}");
                if !used.contains(&cand) {
                    break cand;
                }
                k += 1;
            };
            used.insert(fresh.clone());
            body = subst_rec(&body, b, &Expr::int_var(fresh.clone()), &BTreeSet::new());
            new_bs.push(fresh);
        } else {
            new_bs.push(b.clone());
        }
    }
    (new_bs, body)
}

/// Split multi-variable binders into nested single-variable binders.
pub fn desugar_binders(e: &Expr) -> Expr {
    match e {
        Expr::Quant(k, bs, body) if bs.len() > 1 => {
            let mut inner = desugar_binders(body);
            for b in bs.iter().rev() {
                inner = Expr::Quant(*k, vec![b.clone()], Box::new(inner));
            }
            inner
        }
        _ => e.map_children::<()>(|c| Ok(desugar_binders(c))).unwrap(),
    }
}

/// Canonical form modulo binder renaming and associativity/commutativity of
/// `and`, `or`, `+`, `=` and `distinct`. Used for comparing results.
pub fn canonical(e: &Expr) -> Expr {
    canon(&desugar_binders(e), &mut Vec::new())
}

fn canon(e: &Expr, scope: &mut Vec<(Symbol, Symbol)>) -> Expr {
    match e {
        Expr::Var(n, s) => {
            if let Some((_, c)) = scope.iter().rev().find(|(orig, _)| orig == n) {
                Expr::Var(c.clone(), *s)
            } else {
                e.clone()
            }
        }
        Expr::Quant(k, bs, body) => {
            let len = scope.len();
            let mut names = Vec::new();
            for b in bs {
                let c = format!("%{}", scope.len());
                scope.push((b.clone(), c.clone()));
                names.push(c);
            }
            let body = canon(body, scope);
            scope.truncate(len);
            Expr::Quant(*k, names, Box::new(body))
        }
        Expr::App(op @ (Op::And | Op::Or | Op::Add), args) => {
            let mut flat = Vec::new();
            for a in args {
                match canon(a, scope) {
                    Expr::App(inner, xs) if inner == *op => flat.extend(xs),
                    x => flat.push(x),
                }
            }
            flat.sort_by_key(|x| x.to_string());
            Expr::App(*op, flat)
        }
        Expr::App(op @ (Op::Eq | Op::Neq), args) => {
            let mut xs: Vec<Expr> = args.iter().map(|a| canon(a, scope)).collect();
            xs.sort_by_key(|x| x.to_string());
            Expr::App(*op, xs)
        }
        _ => e.map_children::<()>(|c| Ok(canon(c, scope))).unwrap(),
    }
}

/// Structural equality modulo binder renaming and AC normalization.
pub fn equivalent_modulo_ac(a: &Expr, b: &Expr) -> bool {
    canonical(a) == canonical(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_i(i: Expr) -> Expr {
        Expr::select(Expr::array_var("A"), i)
    }

    #[test]
    fn free_variables_exclude_binders() {
        let e = Expr::forall("i", Expr::ge(a_i(Expr::int_var("i")), Expr::int(0)));
        let fv: Vec<_> = free_variables(&e).into_iter().map(|(n, _)| n).collect();
        assert_eq!(fv, vec!["A"]);

        let e = Expr::gt(Expr::int_var("c"), Expr::int(0));
        assert_eq!(free_names(&e).into_iter().collect::<Vec<_>>(), vec!["c"]);

        let e = Expr::forall(
            "i",
            Expr::eq(
                a_i(Expr::int_var("i")),
                Expr::add(Expr::select(Expr::array_var("B"), Expr::int_var("i")), Expr::int_var("c")),
            ),
        );
        assert_eq!(
            free_names(&e).into_iter().collect::<Vec<_>>(),
            vec!["A", "B", "c"]
        );
    }

    #[test]
    fn substitute_examples() {
        let e = Expr::ge(a_i(Expr::int_var("i")), Expr::int(0));
        assert_eq!(
            substitute(&e, "i", &Expr::int(0)).unwrap(),
            Expr::ge(a_i(Expr::int(0)), Expr::int(0))
        );

        let q = Expr::forall("i", e.clone());
        assert_eq!(substitute(&q, "i", &Expr::int(1)).unwrap(), q);

        let a = Expr::array_var("a");
        let body = Expr::implies(
            Expr::lt(Expr::int_var("x"), Expr::int_var("i")),
            Expr::eq(Expr::select(a.clone(), Expr::int_var("x")), Expr::int(0)),
        );
        let expected = Expr::implies(
            Expr::lt(Expr::int_var("z"), Expr::int_var("i")),
            Expr::eq(Expr::select(a, Expr::int_var("z")), Expr::int(0)),
        );
        assert_eq!(substitute(&body, "x", &Expr::int_var("z")).unwrap(), expected);
    }

    #[test]
    fn substitute_rejects_sort_mismatch() {
        let e = Expr::ge(Expr::int_var("x"), Expr::int(0));
        assert!(substitute(&e, "x", &Expr::bool(true)).is_err());
    }

    #[test]
    fn substitute_avoids_capture() {
        // forall i. A[i] >= x  with x := i must not capture the free i.
        let e = Expr::forall("i", Expr::ge(a_i(Expr::int_var("i")), Expr::int_var("x")));
        let r = substitute(&e, "x", &Expr::int_var("i")).unwrap();
        match &r {
            Expr::Quant(_, bs, body) => {
                assert_ne!(bs[0], "i");
                assert!(free_names(&r).contains("i"));
                assert_eq!(
                    **body,
                    Expr::ge(a_i(Expr::int_var(bs[0].clone())), Expr::int_var("i"))
                );
            }
            _ => panic!("expected a quantifier"),
        }
    }

    #[test]
    fn canonical_ignores_binder_names_and_order() {
        let a = Expr::and(vec![
            Expr::gt(Expr::int_var("c"), Expr::int(0)),
            Expr::forall("z", Expr::ge(a_i(Expr::int_var("z")), Expr::int(0))),
        ]);
        let b = Expr::and(vec![
            Expr::forall("k", Expr::ge(a_i(Expr::int_var("k")), Expr::int(0))),
            Expr::gt(Expr::int_var("c"), Expr::int(0)),
        ]);
        assert!(equivalent_modulo_ac(&a, &b));
    }

    #[test]
    fn fresh_names_are_monotone() {
        let mut f = FreshNames::new();
        assert_eq!(f.next_name(), "z!0");
        assert_eq!(f.next_name(), "z!1");
        let avoid: BTreeSet<_> = ["z!2".to_string()].into();
        assert_eq!(f.next_avoiding(&avoid), "z!3");
    }
}

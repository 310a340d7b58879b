//! Grammars handed to the synthesis backend.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Expr, Grammar, Op, Quantifier, Sort, SynthFun, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Nonterminal names `B` and `I`, suffixed with `_` until no parameter or
/// candidate symbol shadows them.
fn nonterminal_names(f: &SynthFun, taken: &BTreeSet<Symbol>) -> (Symbol, Symbol) {
    let clash = |n: &str| f.params.iter().any(|(p, _)| p == n) || taken.contains(n);
    let (mut b, mut i) = ("B".to_string(), "I".to_string());
    while clash(&b) || clash(&i) {
        b.push('_');
        i.push('_');
    }
    (b, i)
}

fn skeleton(f: &SynthFun, b_nt: &str, i_nt: &str, bool_start: bool) -> Grammar {
    let nts = if bool_start {
        vec![(b_nt.to_string(), Sort::Bool), (i_nt.to_string(), Sort::Int)]
    } else {
        vec![(i_nt.to_string(), Sort::Int), (b_nt.to_string(), Sort::Bool)]
    };
    let mut g = Grammar::new(nts);
    let (bv, iv) = (Expr::bool_var(b_nt), Expr::int_var(i_nt));
    g.add(i_nt, Expr::int(0));
    g.add(i_nt, Expr::int(1));
    for p in f.scalar_params(Sort::Int) {
        g.add(i_nt, Expr::int_var(p.clone()));
    }
    for p in f.scalar_params(Sort::Bool) {
        g.add(b_nt, Expr::bool_var(p.clone()));
    }
    g.add(b_nt, Expr::and(vec![bv.clone(), bv.clone()]));
    g.add(b_nt, Expr::or(vec![bv.clone(), bv]));
    g.add(b_nt, Expr::ge(iv.clone(), iv.clone()));
    g.add(b_nt, Expr::le(iv.clone(), iv.clone()));
    g.add(b_nt, Expr::eq(iv.clone(), iv));
    g
}

/// Linear arithmetic over the non-array parameters plus every array cell
/// below `b`.
pub fn build_template_grammar(f: &SynthFun, b: usize) -> Result<Grammar, GrammarError> {
    let (b_nt, i_nt) = nonterminal_names(f, &BTreeSet::new());
    let iv = Expr::int_var(&i_nt);
    let mut g = match f.return_sort {
        Sort::Array => return Err(GrammarError::Unsupported(format!("`{}` returns an array", f.name))),
        Sort::Bool => skeleton(f, &b_nt, &i_nt, true),
        Sort::Int if f.scalar_params(Sort::Bool).next().is_some() => skeleton(f, &b_nt, &i_nt, false),
        Sort::Int => {
            // no Bool parameter, so no Bool nonterminal is reachable
            let mut g = Grammar::new(vec![(i_nt.clone(), Sort::Int)]);
            g.add(&i_nt, Expr::int(0));
            g.add(&i_nt, Expr::int(1));
            for p in f.scalar_params(Sort::Int) {
                g.add(&i_nt, Expr::int_var(p.clone()));
            }
            g
        }
    };
    if g.is_nonterminal(&b_nt) {
        g.add(&b_nt, Expr::not(Expr::bool_var(&b_nt)));
        if f.return_sort == Sort::Int {
            g.add(&i_nt, Expr::ite(Expr::bool_var(&b_nt), iv.clone(), iv.clone()));
        }
    }
    g.add(&i_nt, Expr::sub(iv.clone(), iv.clone()));
    g.add(&i_nt, Expr::add(iv.clone(), iv));
    for a in f.array_params() {
        for k in 0..b as i64 {
            g.add(&i_nt, Expr::select(Expr::array_var(a.clone()), Expr::int(k)));
        }
    }
    Ok(g)
}

/// Maximal operands below the top-level `and`/`or` structure.
fn leaf_predicates(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::App(Op::And | Op::Or, xs) => xs.iter().for_each(|x| leaf_predicates(x, out)),
        _ => {
            if !out.contains(e) {
                out.push(e.clone())
            }
        }
    }
}

/// The candidate's predicates as building blocks, each quantified one also
/// with its range left open to synthesis.
pub fn build_generalization_grammar(candidate: &Expr, f: &SynthFun) -> Grammar {
    let (b_nt, i_nt) = nonterminal_names(f, &crate::ast::all_symbols(candidate));
    let (bv, iv) = (Expr::bool_var(&b_nt), Expr::int_var(&i_nt));
    let mut g = skeleton(f, &b_nt, &i_nt, f.return_sort != Sort::Int);
    g.add(&i_nt, Expr::add(iv.clone(), iv.clone()));
    g.add(&i_nt, Expr::sub(iv.clone(), iv.clone()));
    let mut leaves = Vec::new();
    if candidate.sort() == Sort::Bool {
        leaf_predicates(candidate, &mut leaves);
    } else {
        g.add(&i_nt, candidate.clone());
        g.add(&i_nt, Expr::ite(bv, iv.clone(), iv.clone()));
        candidate.visit(&mut |e| {
            if let Expr::App(Op::Ite, xs) = e {
                leaf_predicates(&xs[0], &mut leaves);
            }
        });
    }
    for leaf in leaves {
        if let Expr::Quant(k, bs, body) = &leaf {
            let v = Expr::int_var(bs[0].clone());
            let rest = if bs.len() > 1 {
                Expr::quant(*k, bs[1..].to_vec(), (**body).clone())
            } else {
                (**body).clone()
            };
            let range = Expr::and(vec![Expr::le(iv.clone(), v.clone()), Expr::lt(v, iv.clone())]);
            let guarded = match k {
                Quantifier::Forall => Expr::implies(range, rest),
                Quantifier::Exists => Expr::and(vec![range, rest]),
            };
            g.add(&b_nt, Expr::quant(*k, vec![bs[0].clone()], guarded));
        }
        g.add(&b_nt, leaf);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(params: &[(&str, Sort)], ret: Sort) -> SynthFun {
        SynthFun::new("f", params.iter().map(|(n, s)| (n.to_string(), *s)).collect(), ret)
    }

    #[test]
    fn template_for_two_arrays() {
        let f = sig(
            &[("arr1", Sort::Array), ("arr2", Sort::Array), ("y", Sort::Int), ("z", Sort::Int)],
            Sort::Bool,
        );
        let g = build_template_grammar(&f, 2).unwrap();
        g.validate().unwrap();
        assert_eq!(g.start, "B");
        let ints: Vec<String> = g.rules("I").iter().map(|e| e.to_string()).collect();
        assert_eq!(
            ints,
            ["0", "1", "y", "z", "(- I I)", "(+ I I)", "(select arr1 0)", "(select arr1 1)", "(select arr2 0)", "(select arr2 1)"]
        );
        let bools: Vec<String> = g.rules("B").iter().map(|e| e.to_string()).collect();
        assert_eq!(bools, ["(and B B)", "(or B B)", "(>= I I)", "(<= I I)", "(= I I)", "(not B)"]);
    }

    #[test]
    fn template_for_int_return() {
        let f = sig(&[("x", Sort::Int)], Sort::Int);
        let g = build_template_grammar(&f, 2).unwrap();
        g.validate().unwrap();
        assert_eq!(g.nonterminals, vec![("I".to_string(), Sort::Int)]);
        assert_eq!(g.rules("I").len(), 5);
        let f = sig(&[("a", Sort::Array)], Sort::Array);
        assert!(build_template_grammar(&f, 2).is_err());
        let f = sig(&[("a", Sort::Array)], Sort::Bool);
        let g = build_template_grammar(&f, 1).unwrap();
        assert_eq!(g.rules("I").iter().filter(|e| matches!(e, Expr::Select(..))).count(), 1);
    }

    #[test]
    fn nonterminals_avoid_parameters() {
        let f = sig(&[("I", Sort::Int)], Sort::Bool);
        let g = build_template_grammar(&f, 1).unwrap();
        g.validate().unwrap();
        assert_eq!(g.start, "B_");
    }

    #[test]
    fn generalization_adds_ranges() {
        let f = sig(&[("x", Sort::Array), ("y", Sort::Int), ("z", Sort::Int)], Sort::Bool);
        let q = Expr::forall("i", Expr::gt(Expr::select(Expr::array_var("x"), Expr::int_var("i")), Expr::int(0)));
        let cand = Expr::or(vec![q.clone(), Expr::eq(Expr::int_var("y"), Expr::int(0))]);
        let g = build_generalization_grammar(&cand, &f);
        g.validate().unwrap();
        let bools: Vec<String> = g.rules("B").iter().map(|e| e.to_string()).collect();
        assert!(bools.contains(&q.to_string()));
        assert!(bools.contains(&"(= y 0)".to_string()));
        assert!(bools.contains(&"(forall ((i Int)) (=> (and (<= I i) (< i I)) (> (select x i) 0)))".to_string()), "{bools:?}");
        let ints: Vec<String> = g.rules("I").iter().map(|e| e.to_string()).collect();
        assert_eq!(ints, ["0", "1", "y", "z", "(+ I I)", "(- I I)"]);
    }

    #[test]
    fn generalization_of_existentials() {
        let f = sig(&[("x", Sort::Array)], Sort::Bool);
        let cand = Expr::exists("i", Expr::eq(Expr::select(Expr::array_var("x"), Expr::int_var("i")), Expr::int(0)));
        let g = build_generalization_grammar(&cand, &f);
        let bools: Vec<String> = g.rules("B").iter().map(|e| e.to_string()).collect();
        assert!(bools.contains(&"(exists ((i Int)) (and (and (<= I i) (< i I)) (= (select x i) 0)))".to_string()), "{bools:?}");
    }
}

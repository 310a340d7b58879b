//! Generators and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use synrg::ast::{simplify, Expr, FreshNames, Op, Problem, Sort, Symbol, SynthFun};
use synrg::corpus::case;
use synrg::eval::{index_domain, ArrayValue, Evaluator, NoCalls, Valuation, Value};
use synrg::fragment::{index_terms, instantiate_universals, skolemize_with};
use synrg::generalization::syntactic_generalize;
use synrg::restriction::{restrict_constraint, restrict_spec};
use synrg::solvers::{instantiated_spec, synthesize, SynthBackend, SynthOutcome};

pub fn running_example() -> Problem {
    case("running_example").unwrap().problem().unwrap()
}

pub fn sel(a: &str, i: Expr) -> Expr {
    Expr::select(Expr::array_var(a), i)
}

pub fn at(a: &str, i: i64) -> Expr {
    sel(a, Expr::int(i))
}

/// Replace every synthesis-function application by a fresh Bool or Int
/// variable, one per distinct application text. Two constraints that agree
/// under every assignment to these variables agree under every
/// interpretation of the functions.
pub fn abstract_calls(e: &Expr, names: &mut BTreeMap<String, Expr>) -> Expr {
    match e {
        Expr::SynthApp(_, sort, _) => {
            let n = names.len();
            names
                .entry(e.to_string())
                .or_insert_with(|| Expr::var(format!("call{n}"), *sort))
                .clone()
        }
        _ => e.map_children::<()>(|c| Ok(abstract_calls(c, names))).unwrap(),
    }
}

/// Every valuation of `vars`, with arrays of `len` cells (default 0) and
/// all values drawn from `values`.
pub fn valuations(vars: &[(Symbol, Sort)], len: usize, values: &[i64]) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for (name, sort) in vars {
        let choices: Vec<Value> = match sort {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Int => values.iter().map(|&v| Value::Int(v)).collect(),
            Sort::Array => {
                let mut arrays = vec![Vec::new()];
                for _ in 0..len {
                    arrays = arrays
                        .into_iter()
                        .flat_map(|a: Vec<i64>| {
                            values.iter().map(move |&v| {
                                let mut a = a.clone();
                                a.push(v);
                                a
                            })
                        })
                        .collect();
                }
                arrays.into_iter().map(|a| Value::array(ArrayValue::from_slice(&a, 0))).collect()
            }
        };
        out = out
            .into_iter()
            .flat_map(|v| {
                choices.iter().map(move |c| {
                    let mut v = v.clone();
                    v.insert(name.clone(), c.clone());
                    v
                })
            })
            .collect();
    }
    out
}

pub fn eval_bool(e: &Expr, v: &Valuation, domain: &[i64]) -> Option<bool> {
    Evaluator::new(v, &NoCalls, domain).eval_bool(e).ok()
}

/// Draw `n` values from `strategy` with a fixed seed.
pub fn sample<T: std::fmt::Debug>(strategy: impl Strategy<Value = T>, n: usize, seed: u8) -> Vec<T> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..n).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}

fn cmp(op: Op, a: Expr, b: Expr) -> Expr {
    Expr::App(op, vec![a, b])
}

pub fn cmp_op() -> impl Strategy<Value = Op> + Clone {
    prop_oneof![Just(Op::Ge), Just(Op::Gt), Just(Op::Le), Just(Op::Lt), Just(Op::Eq), Just(Op::Neq)]
}

/// An Int term over the arrays `A`, `B` read at constant indices below `b`,
/// the scalar `c` and small literals.
fn bounded_term(b: i64) -> impl Strategy<Value = Expr> + Clone {
    prop_oneof![
        (0..b).prop_map(|i| at("A", i)),
        (0..b).prop_map(|i| at("B", i)),
        Just(Expr::int_var("c")),
        (-1i64..=1).prop_map(Expr::int),
    ]
}

/// Right-hand side of a predicate family instance at index `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Rhs {
    Literal(i64),
    /// `B[i]`.
    Parallel,
    /// `A[i + 1]`.
    Next,
    Scalar,
}

/// One predicate shape instantiated at every index it can take below `b`,
/// joined by one connective. With `drop`, one instance is left out, so the
/// family no longer spans. With `nested`, the family is the alternation
/// "every A[i] equals some B[j]".
fn family(b: i64) -> impl Strategy<Value = Expr> {
    let rhs = prop_oneof![
        (-1i64..=1).prop_map(Rhs::Literal),
        Just(Rhs::Parallel),
        Just(Rhs::Next),
        Just(Rhs::Scalar),
    ];
    (cmp_op(), rhs, any::<bool>(), any::<bool>(), any::<bool>()).prop_map(move |(op, rhs, conj, drop, nested)| {
        let join = |xs: Vec<Expr>| if conj { Expr::and(xs) } else { Expr::or(xs) };
        if nested && rhs == Rhs::Parallel {
            let rows = (0..b)
                .map(|i| Expr::or((0..b).map(|j| Expr::eq(at("A", i), at("B", j))).collect()))
                .collect();
            return join(rows);
        }
        let instance = |i: i64| {
            let r = match rhs {
                Rhs::Literal(k) => Expr::int(k),
                Rhs::Parallel => at("B", i),
                Rhs::Next => at("A", i + 1),
                Rhs::Scalar => Expr::int_var("c"),
            };
            cmp(op, at("A", i), r)
        };
        let last = if rhs == Rhs::Next { b - 1 } else { b };
        let mut items: Vec<Expr> = (0..last).map(instance).collect();
        if drop && items.len() > 1 {
            items.pop();
        }
        join(items)
    })
}

/// Quantifier-free candidates over `A`, `B`, `c` as a bounded synthesis
/// step could return them at bound `b`, of `bool_depth` at most 4.
pub fn bounded_candidate(b: i64) -> impl Strategy<Value = Expr> {
    let atom = (cmp_op(), bounded_term(b), bounded_term(b)).prop_map(|(op, x, y)| cmp(op, x, y));
    let leaf = prop_oneof![2 => family(b), 1 => atom];
    leaf.prop_recursive(1, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::and),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::or),
            inner.prop_map(Expr::not),
        ]
    })
}

/// Constraints over `A`, `B`, `c`, `x` whose quantifiers bind `q0`, `q1`,
/// with reads at a bound variable, at `x` or at a literal in `0..=b`.
pub fn quantified_constraint(b: i64) -> impl Strategy<Value = Expr> {
    fn go(b: i64, depth: u32, bound: Vec<String>) -> BoxedStrategy<Expr> {
        let mut idx: Vec<(u32, BoxedStrategy<Expr>)> =
            vec![(1, (0..=b).prop_map(Expr::int).boxed()), (1, Just(Expr::int_var("x")).boxed())];
        for q in &bound {
            idx.push((3, Just(Expr::int_var(q.as_str())).boxed()));
        }
        let idx = proptest::strategy::Union::new_weighted(idx);
        let term = prop_oneof![
            (prop_oneof![Just("A"), Just("B")], idx).prop_map(|(a, i)| sel(a, i)),
            Just(Expr::int_var("c")),
            (-1i64..=1).prop_map(Expr::int),
        ];
        let atom = (cmp_op(), term.clone(), term).prop_map(|(op, x, y)| cmp(op, x, y)).boxed();
        if depth == 0 {
            return atom;
        }
        let next = format!("q{}", bound.len());
        let mut inner = bound.clone();
        inner.push(next.clone());
        let sub = go(b, depth - 1, bound.clone());
        let quant = go(b, depth - 1, inner);
        prop_oneof![
            2 => atom,
            1 => prop::collection::vec(sub.clone(), 2..=3).prop_map(Expr::and),
            1 => prop::collection::vec(sub.clone(), 2..=3).prop_map(Expr::or),
            1 => (sub.clone(), sub.clone()).prop_map(|(a, c)| Expr::implies(a, c)),
            1 => sub.prop_map(Expr::not),
            2 => (any::<bool>(), quant).prop_map(move |(all, body)| {
                if all { Expr::forall(next.as_str(), body) } else { Expr::exists(next.as_str(), body) }
            }),
        ]
        .boxed()
    }
    go(b, 3, Vec::new())
}

/// Formulas in the array property fragment over one array `A` and a scalar
/// `k`, with every quantified index confined to `0..=3` by its guard.
pub fn fragment_formula() -> impl Strategy<Value = Expr> {
    let bound = prop_oneof![(0i64..=3).prop_map(Expr::int), Just(Expr::int_var("k"))];
    let index = prop_oneof![(0i64..=3).prop_map(Expr::int), Just(Expr::int_var("k"))];
    let value = |v: &str| {
        let read = sel("A", Expr::int_var(v));
        let index = prop_oneof![(0i64..=3).prop_map(Expr::int), Just(Expr::int_var("k"))];
        let rhs = prop_oneof![(-1i64..=1).prop_map(Expr::int), index.prop_map(|i| sel("A", i))];
        let atom = (cmp_op(), rhs).prop_map(move |(op, r)| cmp(op, read.clone(), r));
        prop::collection::vec(atom, 1..=2).prop_flat_map(|xs| prop_oneof![Just(Expr::and(xs.clone())), Just(Expr::or(xs))])
    };
    let x = Expr::int_var("x");
    let guard = (bound.clone(), bound.clone(), any::<bool>()).prop_map(move |(lo, hi, eq)| {
        if eq {
            // x = lo, kept inside the cells by lo's range.
            Expr::and(vec![Expr::eq(x.clone(), lo), Expr::le(Expr::int(0), x.clone()), Expr::le(x.clone(), Expr::int(3))])
        } else {
            Expr::and(vec![Expr::le(lo, x.clone()), Expr::le(x.clone(), hi)])
        }
    });
    let universal = (guard, value("x")).prop_map(|(g, v)| Expr::forall("x", Expr::implies(g, v)));
    let y = Expr::int_var("y");
    let existential = value("y").prop_map(move |v| {
        Expr::exists("y", Expr::and(vec![Expr::le(Expr::int(0), y.clone()), Expr::le(y.clone(), Expr::int(3)), v]))
    });
    let ground = (cmp_op(), index, -1i64..=1).prop_map(|(op, i, v)| cmp(op, sel("A", i), Expr::int(v)));
    let part = prop_oneof![3 => universal, 1 => existential, 1 => ground];
    prop::collection::vec(part, 1..=3).prop_map(Expr::and)
}

/// A problem with one Bool function of `A`, `B`, `c` whose only
/// constraint is `f(A, B, c) = target`.
pub fn reproduce(target: &Expr) -> Problem {
    let params = vec![("A".to_string(), Sort::Array), ("B".to_string(), Sort::Array), ("c".to_string(), Sort::Int)];
    let call = Expr::synth_app("f", Sort::Bool, params.iter().map(|(n, s)| Expr::var(n.as_str(), *s)).collect());
    Problem {
        declared_vars: params.clone(),
        synth_funs: vec![SynthFun::new("f", params, Sort::Bool)],
        constraints: vec![Expr::eq(call, target.clone())],
        ..Problem::default()
    }
}

/// Nesting depth of Boolean structure; comparisons count 1.
pub fn bool_depth(e: &Expr) -> usize {
    match e {
        Expr::App(op, args) if op.is_connective() => 1 + args.iter().map(bool_depth).max().unwrap_or(0),
        Expr::Quant(_, _, body) => 1 + bool_depth(body),
        _ => 1,
    }
}

const SMALL: [i64; 3] = [-1, 0, 1];

fn arrays_and_scalar() -> Vec<(Symbol, Sort)> {
    vec![("A".into(), Sort::Array), ("B".into(), Sort::Array), ("c".into(), Sort::Int)]
}

/// A valuation of arrays of length `b` with values in {-1, 0, 1} on which
/// re-restricting the syntactic generalization of `e` at `b` disagrees with
/// `e`.
pub fn def3_violation(e: &Expr, b: usize) -> Option<Valuation> {
    let back = restrict_constraint(&syntactic_generalize(e, b), b);
    let domain = index_domain(b);
    valuations(&arrays_and_scalar(), b, &SMALL)
        .into_iter()
        .find(|v| eval_bool(&back, v, &domain) != eval_bool(e, v, &domain) || eval_bool(e, v, &domain).is_none())
}

#[derive(Debug, PartialEq)]
pub enum EnumVerdict {
    /// A body for `f` such that `f(A, B, c) = e` fails at the valuation.
    Unsound(Expr, Valuation),
    Sound,
    /// No bindings returned.
    Unsolved,
}

/// Ask the enumerator for a function equal to `e` at bound `b`, and check
/// any answer by brute force over arrays of length `b` with values in
/// {-1, 0, 1}.
pub fn enumerator_verdict(e: &Expr, b: usize, timeout: std::time::Duration) -> EnumVerdict {
    let p = reproduce(e);
    let bp = restrict_spec(&p, b);
    let Ok(SynthOutcome::Solved(bindings)) = synthesize(&bp, None, timeout, &SynthBackend::Internal) else {
        return EnumVerdict::Unsolved;
    };
    let spec = instantiated_spec(&bp.to_problem(), &bindings);
    let domain = index_domain(b);
    match valuations(&arrays_and_scalar(), b, &SMALL)
        .into_iter()
        .find(|v| eval_bool(&spec, v, &domain) != Some(true))
    {
        Some(v) => EnumVerdict::Unsound(bindings["f"].clone(), v),
        None => EnumVerdict::Sound,
    }
}

/// Index terms of `e` outside the scope of any binder they mention.
fn free_index_terms(e: &Expr, bound: &mut Vec<Symbol>, out: &mut Vec<Expr>) {
    match e {
        Expr::Select(a, i) => {
            let mut names = std::collections::BTreeSet::new();
            i.visit(&mut |t| {
                if let Expr::Var(n, _) = t {
                    names.insert(n.clone());
                }
            });
            if !names.iter().any(|n| bound.contains(n)) {
                out.push((**i).clone());
            }
            free_index_terms(a, bound, out);
            free_index_terms(i, bound, out);
        }
        Expr::Quant(_, bs, body) => {
            let len = bound.len();
            bound.extend(bs.iter().cloned());
            free_index_terms(body, bound, out);
            bound.truncate(len);
        }
        _ => e.children().into_iter().for_each(|c| free_index_terms(c, bound, out)),
    }
}

/// A valuation with every free index term of `e` in `0..b` on which the
/// restriction of `e` disagrees with `e` quantified over `0..b`. Arrays have
/// length `b`, values range over {-1, 0, 1} and `x` over `-1..=b`.
pub fn restriction_violation(e: &Expr, b: usize) -> Option<Valuation> {
    let r = restrict_constraint(e, b);
    let mut free = Vec::new();
    free_index_terms(e, &mut Vec::new(), &mut free);
    let domain = index_domain(b);
    let with_x = valuations(&arrays_and_scalar(), b, &SMALL).into_iter().flat_map(|v| {
        (-1..=b as i64).map(move |x| {
            let mut v = v.clone();
            v.insert("x".into(), Value::Int(x));
            v
        })
    });
    with_x.into_iter().find(|v| {
        let in_range = free.iter().all(|t| {
            Evaluator::new(v, &NoCalls, &domain)
                .eval(t)
                .ok()
                .and_then(|k| k.as_int())
                .is_some_and(|k| (0..b as i64).contains(&k))
        });
        in_range && eval_bool(&r, v, &domain) != eval_bool(e, v, &domain)
    })
}

/// A valuation on which `simplify(e)` and `e` disagree, with arrays of
/// length 2 over {-1, 0, 1}, `x` in `-1..=2` and quantifiers over `-1..=2`.
pub fn simplify_violation(e: &Expr) -> Option<Valuation> {
    let s = simplify(e);
    let domain: Vec<i64> = (-1..=2).collect();
    let mut vars = arrays_and_scalar();
    vars.push(("x".into(), Sort::Int));
    valuations(&vars, 2, &[-1, 0, 1, 2])
        .into_iter()
        .find(|v| eval_bool(&s, v, &domain) != eval_bool(e, v, &domain))
}

/// Whether `phi` and its instantiation over its index terms disagree on
/// satisfiability, by brute force: `A` of length 4 over {-1, 0, 1}, `k` in
/// `0..=3`, skolem constants in `-1..=4`, quantifiers over `-2..=6`.
pub fn fragment_disagreement(phi: &Expr) -> Option<String> {
    let (sk, fresh) = match skolemize_with(phi, &mut FreshNames::new()) {
        Ok(x) => x,
        Err(e) => return Some(format!("skolemization failed: {e}")),
    };
    let r = index_terms(&sk);
    let inst = match instantiate_universals(&sk, &r) {
        Ok(e) => e,
        Err(e) => return Some(format!("instantiation failed: {e}")),
    };
    if !inst.is_quantifier_free() {
        return Some(format!("instantiation kept a quantifier: {inst}"));
    }
    let domain: Vec<i64> = (-2..=6).collect();
    let base: Vec<Valuation> = valuations(&[("A".into(), Sort::Array)], 4, &SMALL)
        .into_iter()
        .flat_map(|v| {
            (0..=3).map(move |k| {
                let mut v = v.clone();
                v.insert("k".into(), Value::Int(k));
                v
            })
        })
        .collect();
    let sat_phi = base.iter().any(|v| eval_bool(phi, v, &domain) == Some(true));
    let skolems: Vec<(Symbol, Sort)> = fresh.iter().map(|n| (n.clone(), Sort::Int)).collect();
    let witnesses = valuations(&skolems, 0, &[-1, 0, 1, 2, 3, 4]);
    let sat_inst = base.iter().any(|v| {
        witnesses.iter().any(|w| {
            let mut v = v.clone();
            v.extend(w.clone());
            eval_bool(&inst, &v, &domain) == Some(true)
        })
    });
    (sat_phi != sat_inst).then(|| format!("satisfiable: original {sat_phi}, instantiated {sat_inst}\n  {inst}"))
}

/// The running example at bound 2 with every quantifier written out.
pub fn running_example_at_two() -> Vec<Expr> {
    let c = Expr::int_var("c");
    let inv = |a: &str| Expr::synth_app("inv", Sort::Bool, vec![c.clone(), Expr::array_var(a)]);
    let both = |f: &dyn Fn(i64) -> Expr| Expr::and(vec![f(0), f(1)]);
    vec![
        Expr::implies(
            Expr::and(vec![Expr::gt(c.clone(), Expr::int(0)), both(&|i| Expr::ge(at("A", i), Expr::int(0)))]),
            inv("A"),
        ),
        Expr::implies(
            Expr::and(vec![inv("A"), both(&|i| Expr::eq(at("A2", i), Expr::add(at("A", i), c.clone())))]),
            inv("A2"),
        ),
        Expr::implies(inv("A"), Expr::not(Expr::or(vec![Expr::lt(at("A", 0), Expr::int(0)), Expr::lt(at("A", 1), Expr::int(0))]))),
    ]
}

/// The inductive-step query of the zero-prefix loop, with `a2` for the
/// post-state array.
pub fn zero_prefix_query() -> Expr {
    let i = Expr::int_var("i");
    let x = Expr::int_var("x");
    let j = Expr::int_var("j");
    Expr::and(vec![
        Expr::forall("x", Expr::implies(Expr::lt(x.clone(), i.clone()), Expr::eq(sel("a", x.clone()), Expr::int(0)))),
        Expr::eq(sel("a2", i.clone()), Expr::int(0)),
        Expr::forall("j", Expr::implies(Expr::neq(j.clone(), i.clone()), Expr::eq(sel("a2", j.clone()), sel("a", j)))),
        Expr::exists(
            "x",
            Expr::and(vec![Expr::le(x.clone(), i.clone()), Expr::neq(sel("a2", x), Expr::int(0))]),
        ),
    ])
}

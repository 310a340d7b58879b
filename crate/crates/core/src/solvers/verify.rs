//! Checking candidate bindings against the original, quantified problem.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::external::{run_solver, RunOutput, SolverSpec};
use super::space::ValuationSpace;
use super::SolverError;
use crate::ast::{substitute_all, Expr, Problem, Symbol};
use crate::eval::{Evaluator, NoCalls, Valuation, Value};
use crate::sygus::{parse_reply, print_smtlib_query, ParsedReply};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum VerifyOutcome {
    Valid,
    /// `confirmed` is set when evaluating the constraints over the model's
    /// finite footprint reproduces the violation.
    CounterExample { model: Valuation, confirmed: bool },
    Unknown,
    TimedOut,
}

/// Replace every application of a bound function by its body with the
/// arguments substituted for the parameters.
pub fn inline_bindings(e: &Expr, p: &Problem, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    match e {
        Expr::SynthApp(name, _, args) => {
            let args: Vec<Expr> = args.iter().map(|a| inline_bindings(a, p, bindings)).collect();
            match (p.synth_fun(name), bindings.get(name)) {
                (Some(f), Some(body)) => {
                    let map: BTreeMap<Symbol, Expr> = f.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
                    substitute_all(body, &map)
                }
                _ => Expr::SynthApp(name.clone(), e.sort(), args),
            }
        }
        _ => e.map_children::<()>(|c| Ok(inline_bindings(c, p, bindings))).unwrap(),
    }
}

/// The constraints of `p` with `bindings` inlined, as one conjunction.
pub fn instantiated_spec(p: &Problem, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
    Expr::and(p.constraints.iter().map(|c| inline_bindings(c, p, bindings)).collect())
}

/// Ask an SMT solver whether some valuation falsifies a constraint.
pub fn verify(p: &Problem, bindings: &BTreeMap<Symbol, Expr>, backend: &SolverSpec) -> Result<VerifyOutcome, SolverError> {
    let spec = instantiated_spec(p, bindings);
    if spec.contains_synth_app() {
        return Err(SolverError::Unbound);
    }
    let query = print_smtlib_query(&p.declared_vars, &Expr::not(spec.clone()));
    let stdout = match run_solver(backend, &query)? {
        RunOutput::TimedOut => return Ok(VerifyOutcome::TimedOut),
        RunOutput::Finished { stdout, .. } => stdout,
    };
    Ok(match parse_reply(&stdout, p) {
        ParsedReply::Unsat => VerifyOutcome::Valid,
        ParsedReply::Sat(partial) => {
            let model = complete_model(p, partial);
            let confirmed = falsified_on_footprint(&spec, &model);
            VerifyOutcome::CounterExample { model, confirmed }
        }
        _ => VerifyOutcome::Unknown,
    })
}

fn complete_model(p: &Problem, mut model: BTreeMap<Symbol, Value>) -> Valuation {
    for (v, s) in &p.declared_vars {
        model.entry(v.clone()).or_insert_with(|| Value::default_of(*s));
    }
    model
}

/// Quantifiers range over the indices and integers the model mentions.
fn falsified_on_footprint(spec: &Expr, model: &Valuation) -> bool {
    let mut domain: BTreeSet<i64> = BTreeSet::from([0]);
    for v in model.values() {
        match v {
            Value::Int(i) => {
                domain.insert(*i);
            }
            Value::Array(a) => domain.extend(a.entries.keys().copied()),
            Value::Bool(_) => {}
        }
    }
    let domain: Vec<i64> = domain.into_iter().collect();
    Evaluator::new(model, &NoCalls, &domain).eval_bool(spec) == Ok(false)
}

/// Finite models tried by `check_bounded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundedCheckConfig {
    pub max_len: usize,
    /// Explicit cells below index 0 in every model.
    pub negative_cells: usize,
    pub window: (i64, i64),
    pub exhaustive: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundedCheckConfig {
    fn default() -> Self {
        BoundedCheckConfig {
            max_len: 3,
            negative_cells: 1,
            window: (-2, 2),
            exhaustive: 100_000,
            samples: 5_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum BoundedCheck {
    /// No violation among `valuations` finite models. Not a proof.
    Passed { valuations: usize },
    Failed { model: Valuation, array_len: usize },
}

/// Search for a violation among arrays with explicit cells at
/// `-negative_cells..len` for `len` in `1..=max_len`, all other elements
/// sharing one value from the window, and quantifiers over the explicit
/// cells and the values of Int variables.
pub fn check_bounded(p: &Problem, bindings: &BTreeMap<Symbol, Expr>, cfg: &BoundedCheckConfig) -> BoundedCheck {
    let spec = instantiated_spec(p, bindings);
    let mut valuations = 0;
    for len in 1..=cfg.max_len {
        let space = ValuationSpace::new(p.declared_vars.clone(), len, cfg.window)
            .negative_cells(cfg.negative_cells)
            .vary_default(true);
        for v in space.search_order(cfg.exhaustive, cfg.samples, cfg.seed) {
            valuations += 1;
            if Evaluator::new(&v, &NoCalls, &space.domain_for(&v)).eval_bool(&spec) != Ok(true) {
                return BoundedCheck::Failed { model: v, array_len: len };
            }
        }
    }
    BoundedCheck::Passed { valuations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Sort, SynthFun};

    fn running_example() -> Problem {
        let c = Expr::int_var("c");
        let a = Expr::array_var("A");
        let a2 = Expr::array_var("A2");
        let i = Expr::int_var("i");
        let inv = |arr: &Expr| Expr::synth_app("inv", Sort::Bool, vec![c.clone(), arr.clone()]);
        let at = |arr: &Expr| Expr::select(arr.clone(), i.clone());
        Problem {
            declared_vars: vec![("A".into(), Sort::Array), ("A2".into(), Sort::Array), ("c".into(), Sort::Int)],
            synth_funs: vec![SynthFun::new("inv", vec![("c".into(), Sort::Int), ("A".into(), Sort::Array)], Sort::Bool)],
            constraints: vec![
                Expr::implies(
                    Expr::and(vec![Expr::gt(c.clone(), Expr::int(0)), Expr::forall("i", Expr::ge(at(&a), Expr::int(0)))]),
                    inv(&a),
                ),
                Expr::implies(
                    Expr::and(vec![inv(&a), Expr::forall("i", Expr::eq(at(&a2), Expr::add(at(&a), c.clone())))]),
                    inv(&a2),
                ),
                Expr::implies(inv(&a), Expr::not(Expr::exists("i", Expr::lt(at(&a), Expr::int(0))))),
            ],
            ..Problem::default()
        }
    }

    fn candidate(strong: bool) -> BTreeMap<Symbol, Expr> {
        let c = Expr::int_var("c");
        let body = if strong {
            Expr::and(vec![
                Expr::forall("z", Expr::ge(Expr::select(Expr::array_var("A"), Expr::int_var("z")), Expr::int(0))),
                Expr::gt(c, Expr::int(0)),
            ])
        } else {
            Expr::ge(c, Expr::int(0))
        };
        BTreeMap::from([("inv".to_string(), body)])
    }

    #[test]
    fn inlining_renames_parameters() {
        let p = running_example();
        let spec = instantiated_spec(&p, &candidate(true));
        assert!(!spec.contains_synth_app());
        assert!(spec.to_string().contains("(select A2 z)"), "{spec}");
    }

    #[test]
    fn bounded_check_separates_the_candidates() {
        let p = running_example();
        let cfg = BoundedCheckConfig::default();
        assert!(matches!(check_bounded(&p, &candidate(true), &cfg), BoundedCheck::Passed { .. }));
        let BoundedCheck::Failed { model, .. } = check_bounded(&p, &candidate(false), &cfg) else {
            panic!("weak candidate passed")
        };
        let a = match &model["A"] {
            Value::Array(a) => a.clone(),
            v => panic!("{v}"),
        };
        assert!(a.entries.values().any(|&x| x < 0) || a.default < 0);
    }
}

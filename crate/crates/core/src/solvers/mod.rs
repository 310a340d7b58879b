//! Synthesis and verification backends.

mod enumerate;
mod external;
mod space;
mod verify;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{Expr, Grammar, Problem, Symbol};
use crate::eval::{Evaluator, Interp};
use crate::generalization::build_template_grammar;
use crate::restriction::BoundedProblem;
use crate::sygus::{parse_reply, print_sygus, ParsedReply};

pub use enumerate::{enumerate_candidates, enumerate_with, infeasible_at, CegisConfig, EnumLimits, EnumStats};
pub use external::{find_on_path, run_solver, RunOutput, SolverKind, SolverSpec};
pub use space::{finite_check, finite_check_with, finite_equivalent, vars_of, FiniteResult, OracleTooLarge, ValuationSpace, ORACLE_CEILING};
pub use verify::{check_bounded, inline_bindings, instantiated_spec, verify, BoundedCheck, BoundedCheckConfig, VerifyOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("bindings leave a synthesis function uninterpreted")]
    Unbound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "bindings")]
pub enum SynthOutcome {
    Solved(BTreeMap<Symbol, Expr>),
    Infeasible,
    TimedOut,
    Unknown,
}

/// Where synthesis queries go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthBackend {
    External(SolverSpec),
    /// The enumerator, with its default limits and window.
    Internal,
}

/// Solve the bounded problem `bp`. Without a grammar the internal backend
/// uses the template grammar for the bound.
pub fn synthesize(
    bp: &BoundedProblem,
    grammar: Option<&Grammar>,
    timeout: Duration,
    backend: &SynthBackend,
) -> Result<SynthOutcome, SolverError> {
    let mut p = bp.to_problem();
    let cfg = CegisConfig {
        array_len: bp.bound,
        ..CegisConfig::default()
    };
    let out = match backend {
        SynthBackend::Internal => {
            let [f] = p.synth_funs.as_slice() else {
                return Ok(SynthOutcome::Unknown);
            };
            let default;
            let g = match grammar.or(f.grammar.as_ref()) {
                Some(g) => g,
                None => match build_template_grammar(f, bp.bound) {
                    Ok(g) => {
                        default = g;
                        &default
                    }
                    Err(_) => return Ok(SynthOutcome::Unknown),
                },
            };
            let limits = EnumLimits {
                timeout,
                ..EnumLimits::default()
            };
            enumerate_candidates(&p, g, &limits, &cfg)
        }
        SynthBackend::External(spec) => {
            if let Some(g) = grammar {
                for f in &mut p.synth_funs {
                    f.grammar = Some(g.clone());
                }
            }
            let Ok(query) = print_sygus(&p, false) else {
                return Ok(SynthOutcome::Unknown);
            };
            match run_solver(&spec.with_timeout(timeout.min(spec.wall_timeout)), &query)? {
                RunOutput::TimedOut => SynthOutcome::TimedOut,
                RunOutput::Finished { stdout, .. } => match parse_reply(&stdout, &p) {
                    ParsedReply::Unsat => SynthOutcome::Infeasible,
                    ParsedReply::DefineFuns(defs) => {
                        let bindings: BTreeMap<Symbol, Expr> =
                            defs.into_iter().map(|(f, body)| (f.name, body)).collect();
                        if p.synth_funs.iter().all(|f| bindings.contains_key(&f.name)) {
                            SynthOutcome::Solved(bindings)
                        } else {
                            SynthOutcome::Unknown
                        }
                    }
                    _ => SynthOutcome::Unknown,
                },
            }
        }
    };
    Ok(match out {
        SynthOutcome::Solved(b) if !passes_finite_gate(&p, &b, &cfg) => SynthOutcome::Unknown,
        out => out,
    })
}

/// Whether `bindings` satisfy every constraint on the valuations the
/// enumerator would search with `cfg`.
pub fn passes_finite_gate(p: &Problem, bindings: &BTreeMap<Symbol, Expr>, cfg: &CegisConfig) -> bool {
    let mut interp = Interp::new();
    for f in &p.synth_funs {
        match bindings.get(&f.name) {
            Some(body) if body.typecheck() == Ok(f.return_sort) => {
                interp = interp.with(f.name.clone(), f.params.clone(), body.clone());
            }
            _ => return false,
        }
    }
    let space = ValuationSpace::new(p.declared_vars.clone(), cfg.array_len, cfg.window)
        .negative_cells(cfg.negative_cells)
        .vary_default(cfg.vary_default);
    let ok = space.search_order(cfg.exhaustive, cfg.samples, cfg.seed).all(|v| {
        let domain = space.domain_for(&v);
        let ev = Evaluator::new(&v, &interp, &domain);
        p.constraints.iter().all(|c| ev.eval_bool(c) == Ok(true))
    });
    ok
}

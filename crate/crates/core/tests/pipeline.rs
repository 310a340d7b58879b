//! The bounded loop end to end.

mod common;

use std::time::Duration;

use common::running_example;
use synrg::driver::{solve, FailureReason, PhaseOutcome, PipelineConfig, RunOutcome, SolvedBy};
use synrg::restriction::BoundConfig;
use synrg::solvers::{find_on_path, SolverKind, SolverSpec, VerifyOutcome};
use synrg::sygus::parse_problem;

fn internal() -> PipelineConfig {
    PipelineConfig {
        accept_unverified: true,
        ..PipelineConfig::default()
    }
}

/// Realizable on every bounded array but not on unbounded ones: index 99
/// demands both values of `inv`.
const FAR_INDEX: &str = "
(set-logic ALL)
(synth-fun inv ((A (Array Int Int))) Bool)
(declare-var A (Array Int Int))
(constraint (=> (= (select A 99) 0) (inv A)))
(constraint (=> (= (select A 99) 0) (not (inv A))))
(check-synth)
";

fn far_index_config(bound: BoundConfig) -> PipelineConfig {
    let mut cfg = internal();
    cfg.bound = bound;
    cfg.generalization_limits.timeout = Duration::from_secs(5);
    cfg
}

#[test]
fn running_example_solves_at_two_without_backends() {
    let report = solve(&running_example(), &internal());
    let RunOutcome::Solved { verified, bound, phase, .. } = report.outcome else {
        panic!("{:?}", report.outcome)
    };
    assert!(!verified);
    assert_eq!((bound, phase), (2, SolvedBy::Syntactic));
    let last = report.per_iteration.last().unwrap().phases.last().unwrap();
    assert_eq!(last.outcome, PhaseOutcome::BoundedPassed);
}

#[test]
fn far_index_exhausts_the_schedule() {
    let p = parse_problem(FAR_INDEX).unwrap();
    for (bound, want) in [
        (BoundConfig { b_start: 2, b_max: 2, step: 1 }, vec![2]),
        (BoundConfig { b_start: 1, b_max: 4, step: 2 }, vec![1, 3, 4]),
    ] {
        let report = solve(&p, &far_index_config(bound));
        assert!(
            matches!(report.outcome, RunOutcome::Failed { reason: FailureReason::BoundExhausted }),
            "{:?}",
            report.outcome
        );
        let iterations = (bound.b_max - bound.b_start).div_ceil(bound.step) + 1;
        let got: Vec<usize> = report.per_iteration.iter().map(|it| it.bound).collect();
        assert_eq!(got.len(), iterations);
        assert_eq!(got, want);
    }
}

fn without_elapsed(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("elapsed");
            m.values_mut().for_each(without_elapsed);
        }
        serde_json::Value::Array(xs) => xs.iter_mut().for_each(without_elapsed),
        _ => {}
    }
}

#[test]
fn reports_repeat_apart_from_timings() {
    let p = running_example();
    let run = || {
        let mut v = serde_json::to_value(solve(&p, &internal())).unwrap();
        without_elapsed(&mut v);
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn verified_runs_record_a_valid_check() {
    let Some(z3) = find_on_path("z3") else {
        eprintln!("z3 not on PATH; skipped");
        return;
    };
    let mut cfg = PipelineConfig::default();
    cfg.smt_solver = Some(SolverSpec::new(&z3.to_string_lossy(), SolverKind::Smt, cfg.verify_timeout).unwrap());
    let report = solve(&running_example(), &cfg);
    assert!(report.is_verified(), "{:?}", report.outcome);
    let checks = report.per_iteration.iter().flat_map(|it| &it.phases).flat_map(|ph| &ph.checks);
    assert!(checks.into_iter().any(|c| *c == VerifyOutcome::Valid));
}

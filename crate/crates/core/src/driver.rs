//! The restrict, synthesize, generalize, verify loop over growing bounds, and
//! a benchmark harness that runs it over a directory of problems.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use crate::ast::{Expr, Problem, Symbol};
use crate::fragment::{classify_array_property, FragmentReport};
use crate::generalization::{build_generalization_grammar, build_template_grammar, syntactic_generalize_traced, MatchSet};
use crate::restriction::{restrict_spec, BoundConfig, BoundedProblem};
use crate::solvers::{
    check_bounded, enumerate_with, find_on_path, instantiated_spec, synthesize, verify, BoundedCheck, BoundedCheckConfig,
    CegisConfig, EnumLimits, SolverError, SolverKind, SolverSpec, SynthBackend, SynthOutcome, VerifyOutcome,
};
use crate::sygus::{parse_problem, print_sygus};

fn secs<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub bound: BoundConfig,
    #[serde(serialize_with = "secs")]
    pub fast_synth_timeout: Duration,
    #[serde(serialize_with = "secs")]
    pub template_synth_timeout: Duration,
    #[serde(serialize_with = "secs")]
    pub verify_timeout: Duration,
    #[serde(serialize_with = "secs")]
    pub total_timeout: Duration,
    /// External SyGuS solver; the enumerator when absent.
    pub synth_solver: Option<SolverSpec>,
    /// External SMT solver; without one, candidates only pass finite checks.
    pub smt_solver: Option<SolverSpec>,
    /// Retry with the enumerator or finite check when a backend fails.
    pub use_internal_fallback: bool,
    /// Return candidates that passed only the finite check.
    pub accept_unverified: bool,
    /// Record the match sets of every syntactic generalization.
    pub trace_generalization: bool,
    /// Limits of the synthesis-based generalization; its timeout is the
    /// remaining total budget.
    pub generalization_limits: EnumLimits,
    pub bounded_check: BoundedCheckConfig,
    /// Directory that receives the bounded query of every bound tried.
    pub emit_bounded: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bound: BoundConfig::default(),
            fast_synth_timeout: Duration::from_secs(2),
            template_synth_timeout: Duration::from_secs(60),
            verify_timeout: Duration::from_secs(30),
            total_timeout: Duration::from_secs(300),
            synth_solver: None,
            smt_solver: None,
            use_internal_fallback: true,
            accept_unverified: false,
            trace_generalization: false,
            generalization_limits: EnumLimits {
                max_size: 12,
                max_candidates: 10_000,
                timeout: Duration::from_secs(300),
            },
            bounded_check: BoundedCheckConfig::default(),
            emit_bounded: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.bound.validate()?;
        if self.fast_synth_timeout > self.template_synth_timeout || self.template_synth_timeout > self.total_timeout {
            return Err("timeouts must satisfy fast <= template <= total".into());
        }
        if self.verify_timeout.is_zero() {
            return Err("verify timeout must be positive".into());
        }
        Ok(())
    }

    /// Backends named by the environment, or a `z3` or `cvc5` binary on
    /// `PATH` for verification.
    pub fn detect_backends(mut self) -> Self {
        if self.synth_solver.is_none() {
            self.synth_solver = SolverSpec::from_env(SolverKind::Synthesis, self.template_synth_timeout);
        }
        if self.smt_solver.is_none() {
            self.smt_solver = SolverSpec::from_env(SolverKind::Smt, self.verify_timeout).or_else(|| {
                let (path, args) = if let Some(p) = find_on_path("z3") {
                    (p, "")
                } else {
                    (find_on_path("cvc5")?, " --lang smt2 --produce-models")
                };
                SolverSpec::new(&format!("{}{args}", path.display()), SolverKind::Smt, self.verify_timeout).ok()
            });
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Bounded synthesis with the backend's own default grammar.
    FastSynthesis,
    /// Bounded synthesis with the template grammar.
    TemplateSynthesis,
    SyntacticGeneralization,
    /// Check of the syntactically generalized candidate.
    Verification,
    /// Enumeration over the generalization grammar against the full problem,
    /// checking each candidate as it is found.
    SynthesisGeneralization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOutcome {
    Solved,
    Infeasible,
    TimedOut,
    Unknown,
    BackendUnavailable,
    Valid,
    CounterExample,
    /// Passed the finite check with no verifier available.
    BoundedPassed,
    BoundedFailed,
    Exhausted,
    Generalized,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseRecord {
    pub phase: PhaseKind,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
    pub outcome: PhaseOutcome,
    /// Whether the enumerator stood in for an external backend.
    pub internal: bool,
    pub candidate: Option<BTreeMap<Symbol, Expr>>,
    /// Verification outcomes, one per checked candidate.
    pub checks: Vec<VerifyOutcome>,
    /// Failed finite checks, one per rejected candidate.
    pub bounded_failures: Vec<BoundedCheck>,
    /// Candidates produced by the enumerator in this phase.
    pub enumerated: usize,
}

impl PhaseRecord {
    fn new(phase: PhaseKind, started: Instant, outcome: PhaseOutcome) -> Self {
        PhaseRecord {
            phase,
            elapsed: started.elapsed(),
            outcome,
            internal: false,
            candidate: None,
            checks: Vec::new(),
            bounded_failures: Vec::new(),
            enumerated: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Iteration {
    pub bound: usize,
    pub phases: Vec<PhaseRecord>,
    /// Present with `trace_generalization`.
    pub match_sets: Vec<MatchSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    BoundExhausted,
    TotalTimeout,
    /// A backend failed without fallback, or a candidate needed a verifier
    /// that is not configured.
    BackendUnavailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvedBy {
    Syntactic,
    Synthesis,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Solved {
        bindings: BTreeMap<Symbol, Expr>,
        /// An SMT solver answered unsat for the negated problem.
        verified: bool,
        bound: usize,
        phase: SolvedBy,
    },
    Failed {
        reason: FailureReason,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub per_iteration: Vec<Iteration>,
    /// Classification of the solved problem with its bindings inlined, or of
    /// the problem itself when unsolved.
    pub fragment: FragmentReport,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

impl RunReport {
    pub fn is_solved(&self) -> bool {
        matches!(self.outcome, RunOutcome::Solved { .. })
    }

    pub fn is_verified(&self) -> bool {
        matches!(self.outcome, RunOutcome::Solved { verified: true, .. })
    }
}

/// How a candidate fared against the full problem.
enum Check {
    Valid,
    /// Passed finite checks only.
    Unverified,
    Rejected,
    /// Needs a verifier that is not available.
    NoVerifier,
}

struct Run<'a> {
    p: &'a Problem,
    cfg: &'a PipelineConfig,
    started: Instant,
    deadline: Instant,
}

enum Step {
    Done(RunOutcome),
    NextBound,
}

impl Run<'_> {
    fn remaining(&self) -> Duration {
        self.deadline.saturating_duration_since(Instant::now())
    }

    fn expired(&self) -> bool {
        Instant::now() >= self.deadline
    }

    fn check(&self, bindings: &BTreeMap<Symbol, Expr>, rec: &mut PhaseRecord) -> Check {
        if let Some(smt) = &self.cfg.smt_solver {
            match verify(self.p, bindings, &smt.with_timeout(self.cfg.verify_timeout.min(self.remaining()))) {
                Ok(out) => {
                    let valid = out == VerifyOutcome::Valid;
                    rec.checks.push(out);
                    return if valid { Check::Valid } else { Check::Rejected };
                }
                Err(SolverError::Unbound) => return Check::Rejected,
                Err(SolverError::BackendUnavailable(_)) if !self.cfg.use_internal_fallback => return Check::NoVerifier,
                Err(SolverError::BackendUnavailable(_)) => rec.internal = true,
            }
        }
        match check_bounded(self.p, bindings, &self.cfg.bounded_check) {
            BoundedCheck::Passed { .. } if self.cfg.accept_unverified => Check::Unverified,
            BoundedCheck::Passed { .. } => Check::NoVerifier,
            failed => {
                rec.bounded_failures.push(failed);
                Check::Rejected
            }
        }
    }

    fn synth(&self, bp: &BoundedProblem, phase: PhaseKind, timeout: Duration) -> Result<PhaseRecord, RunOutcome> {
        let t = Instant::now();
        let timeout = timeout.min(self.remaining());
        let grammar = match phase {
            PhaseKind::TemplateSynthesis => match self.p.synth_funs.as_slice() {
                [f] => build_template_grammar(f, bp.bound).ok(),
                _ => None,
            },
            _ => None,
        };
        let external = self.cfg.synth_solver.clone().map(SynthBackend::External);
        let mut internal = external.is_none();
        let backend = external.unwrap_or(SynthBackend::Internal);
        let out = match synthesize(bp, grammar.as_ref(), timeout, &backend) {
            Ok(out) => out,
            Err(_) if self.cfg.use_internal_fallback => {
                internal = true;
                synthesize(bp, grammar.as_ref(), timeout, &SynthBackend::Internal).unwrap_or(SynthOutcome::Unknown)
            }
            Err(_) => {
                return Err(RunOutcome::Failed {
                    reason: FailureReason::BackendUnavailable,
                })
            }
        };
        let (outcome, candidate) = match out {
            SynthOutcome::Solved(b) => (PhaseOutcome::Solved, Some(b)),
            SynthOutcome::Infeasible => (PhaseOutcome::Infeasible, None),
            SynthOutcome::TimedOut => (PhaseOutcome::TimedOut, None),
            SynthOutcome::Unknown => (PhaseOutcome::Unknown, None),
        };
        let mut rec = PhaseRecord::new(phase, t, outcome);
        rec.internal = internal;
        rec.candidate = candidate;
        Ok(rec)
    }

    fn emit(&self, bp: &BoundedProblem) {
        let Some(dir) = &self.cfg.emit_bounded else { return };
        if let Ok(text) = print_sygus(&bp.to_problem(), false) {
            // Emission is a debugging aid; a failed write does not stop the run.
            let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(format!("b{}.sl", bp.bound)), text));
        }
    }

    fn iteration(&self, b: usize, it: &mut Iteration) -> Step {
        let bp = restrict_spec(self.p, b);
        self.emit(&bp);

        // Bounded synthesis. The enumerator has no grammar-free mode, so
        // internally the template grammar serves both queries and the second
        // only runs when the first ran out of time.
        let fast = match self.synth(&bp, PhaseKind::FastSynthesis, self.cfg.fast_synth_timeout) {
            Ok(r) => r,
            Err(out) => return Step::Done(out),
        };
        let retry = fast.outcome != PhaseOutcome::Solved && (!fast.internal || fast.outcome == PhaseOutcome::TimedOut);
        let mut bounded = fast.candidate.clone();
        it.phases.push(fast);
        if retry {
            if self.expired() {
                return Step::Done(timeout());
            }
            let template = match self.synth(&bp, PhaseKind::TemplateSynthesis, self.cfg.template_synth_timeout) {
                Ok(r) => r,
                Err(out) => return Step::Done(out),
            };
            bounded = template.candidate.clone();
            it.phases.push(template);
        }
        let Some(bounded) = bounded else { return Step::NextBound };
        if self.expired() {
            return Step::Done(timeout());
        }

        let t = Instant::now();
        let mut general = BTreeMap::new();
        for (name, body) in &bounded {
            let mut trace = |m: &MatchSet| {
                if self.cfg.trace_generalization {
                    it.match_sets.push(m.clone());
                }
            };
            general.insert(name.clone(), syntactic_generalize_traced(body, b, &mut trace));
        }
        let mut rec = PhaseRecord::new(PhaseKind::SyntacticGeneralization, t, PhaseOutcome::Generalized);
        rec.candidate = Some(general.clone());
        it.phases.push(rec);

        let t = Instant::now();
        let mut rec = PhaseRecord::new(PhaseKind::Verification, t, PhaseOutcome::Unknown);
        let verdict = self.check(&general, &mut rec);
        rec.elapsed = t.elapsed();
        rec.candidate = Some(general.clone());
        rec.outcome = outcome_of(&verdict, &rec);
        it.phases.push(rec);
        match verdict {
            Check::Valid => return Step::Done(solved(general, true, b, SolvedBy::Syntactic)),
            Check::Unverified => return Step::Done(solved(general, false, b, SolvedBy::Syntactic)),
            Check::NoVerifier => return Step::Done(unavailable()),
            Check::Rejected => {}
        }
        if self.expired() {
            return Step::Done(timeout());
        }

        let [f] = self.p.synth_funs.as_slice() else { return Step::NextBound };
        let t = Instant::now();
        let grammar = build_generalization_grammar(&general[&f.name], f);
        let limits = EnumLimits {
            timeout: self.remaining(),
            ..self.cfg.generalization_limits
        };
        let cegis = CegisConfig {
            array_len: b + 1,
            negative_cells: 1,
            vary_default: true,
            ..CegisConfig::default()
        };
        let mut rec = PhaseRecord::new(PhaseKind::SynthesisGeneralization, t, PhaseOutcome::Exhausted);
        let mut verdict = Check::Rejected;
        let (out, stats) = enumerate_with(self.p, &grammar, &limits, &cegis, &mut |body| {
            let bindings = BTreeMap::from([(f.name.clone(), body.clone())]);
            verdict = self.check(&bindings, &mut rec);
            !matches!(verdict, Check::Rejected)
        });
        rec.elapsed = t.elapsed();
        rec.enumerated = stats.candidates;
        let found = match out {
            SynthOutcome::Solved(bindings) => Some(bindings),
            SynthOutcome::Infeasible => {
                rec.outcome = PhaseOutcome::Infeasible;
                None
            }
            SynthOutcome::TimedOut | SynthOutcome::Unknown => None,
        };
        let Some(bindings) = found else {
            it.phases.push(rec);
            return if self.expired() { Step::Done(timeout()) } else { Step::NextBound };
        };
        rec.outcome = outcome_of(&verdict, &rec);
        rec.candidate = Some(bindings.clone());
        it.phases.push(rec);
        match verdict {
            Check::Valid => Step::Done(solved(bindings, true, b, SolvedBy::Synthesis)),
            Check::Unverified => Step::Done(solved(bindings, false, b, SolvedBy::Synthesis)),
            Check::NoVerifier => Step::Done(unavailable()),
            Check::Rejected => Step::NextBound,
        }
    }
}

fn outcome_of(c: &Check, rec: &PhaseRecord) -> PhaseOutcome {
    match c {
        Check::Valid => PhaseOutcome::Valid,
        Check::Unverified | Check::NoVerifier => PhaseOutcome::BoundedPassed,
        Check::Rejected => match rec.checks.last() {
            Some(VerifyOutcome::CounterExample { .. }) => PhaseOutcome::CounterExample,
            Some(VerifyOutcome::TimedOut) => PhaseOutcome::TimedOut,
            Some(_) => PhaseOutcome::Unknown,
            None => PhaseOutcome::BoundedFailed,
        },
    }
}

fn solved(bindings: BTreeMap<Symbol, Expr>, verified: bool, bound: usize, phase: SolvedBy) -> RunOutcome {
    RunOutcome::Solved {
        bindings,
        verified,
        bound,
        phase,
    }
}

fn timeout() -> RunOutcome {
    RunOutcome::Failed {
        reason: FailureReason::TotalTimeout,
    }
}

fn unavailable() -> RunOutcome {
    RunOutcome::Failed {
        reason: FailureReason::BackendUnavailable,
    }
}

/// Run the bounded loop on `p` until a candidate is accepted, the bounds run
/// out or the total budget is spent.
pub fn solve(p: &Problem, cfg: &PipelineConfig) -> RunReport {
    let started = Instant::now();
    let run = Run {
        p,
        cfg,
        started,
        deadline: started + cfg.total_timeout,
    };
    let mut per_iteration = Vec::new();
    let mut outcome = RunOutcome::Failed {
        reason: FailureReason::BoundExhausted,
    };
    for b in cfg.bound.schedule() {
        if run.expired() {
            outcome = timeout();
            break;
        }
        let mut it = Iteration {
            bound: b,
            phases: Vec::new(),
            match_sets: Vec::new(),
        };
        let step = run.iteration(b, &mut it);
        per_iteration.push(it);
        if let Step::Done(out) = step {
            outcome = out;
            break;
        }
    }
    let fragment = match &outcome {
        RunOutcome::Solved { bindings, .. } => classify_array_property(&instantiated_spec(p, bindings)),
        RunOutcome::Failed { .. } => classify_array_property(&p.conjunction()),
    };
    RunReport {
        outcome,
        per_iteration,
        fragment,
        elapsed: run.started.elapsed(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub file: PathBuf,
    /// Name of the directory holding the file.
    pub category: String,
    /// `solved`, `unverified`, a failure reason or `parse_error`.
    pub status: String,
    #[serde(serialize_with = "secs")]
    pub wall: Duration,
    pub final_bound: Option<usize>,
    pub phase: Option<SolvedBy>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub total: usize,
    pub solved: usize,
    pub unverified: usize,
    pub syntactic: usize,
    pub synthesis: usize,
    pub timeout: usize,
    pub failed: usize,
    pub parse_errors: usize,
}

impl Tally {
    fn add(&mut self, r: &BenchRow) {
        self.total += 1;
        match r.status.as_str() {
            "solved" => self.solved += 1,
            "unverified" => self.unverified += 1,
            "total_timeout" => self.timeout += 1,
            "parse_error" => self.parse_errors += 1,
            _ => self.failed += 1,
        }
        match r.phase {
            Some(SolvedBy::Syntactic) => self.syntactic += 1,
            Some(SolvedBy::Synthesis) => self.synthesis += 1,
            None => {}
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    pub overall: Tally,
    pub by_category: BTreeMap<String, Tally>,
    /// Over solved and unverified rows, in seconds.
    pub median_time: Option<f64>,
    pub mean_time: Option<f64>,
}

impl BenchmarkReport {
    fn from_rows(rows: Vec<BenchRow>) -> Self {
        let mut report = BenchmarkReport::default();
        for r in &rows {
            report.overall.add(r);
            report.by_category.entry(r.category.clone()).or_default().add(r);
        }
        let mut times: Vec<f64> = rows
            .iter()
            .filter(|r| r.phase.is_some())
            .map(|r| r.wall.as_secs_f64())
            .collect();
        times.sort_by(f64::total_cmp);
        if !times.is_empty() {
            let n = times.len();
            report.median_time = Some(if n % 2 == 1 {
                times[n / 2]
            } else {
                (times[n / 2 - 1] + times[n / 2]) / 2.0
            });
            report.mean_time = Some(times.iter().sum::<f64>() / n as f64);
        }
        report.rows = rows;
        report
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<40} {:<10} {:<20} {:>9} {:>5} {:<9}\n", "file", "category", "status", "time(s)", "bound", "phase");
        for r in &self.rows {
            let phase = match r.phase {
                Some(SolvedBy::Syntactic) => "syntactic",
                Some(SolvedBy::Synthesis) => "synthesis",
                None => "-",
            };
            out += &format!(
                "{:<40} {:<10} {:<20} {:>9.3} {:>5} {:<9}\n",
                r.file.file_name().map_or_else(|| r.file.display().to_string(), |n| n.to_string_lossy().into_owned()),
                r.category,
                r.status,
                r.wall.as_secs_f64(),
                r.final_bound.map_or_else(|| "-".into(), |b| b.to_string()),
                phase
            );
        }
        out += "\n";
        for (cat, t) in std::iter::once(("all", &self.overall)).chain(self.by_category.iter().map(|(c, t)| (c.as_str(), t))) {
            out += &format!(
                "{cat:<10} total {:>3}  solved {:>3}  unverified {:>3}  syntactic {:>3}  synthesis {:>3}  timeout {:>3}  failed {:>3}  parse errors {:>3}\n",
                t.total, t.solved, t.unverified, t.syntactic, t.synthesis, t.timeout, t.failed, t.parse_errors
            );
        }
        if let (Some(m), Some(a)) = (self.median_time, self.mean_time) {
            out += &format!("median {m:.3}s  mean {a:.3}s\n");
        }
        out
    }
}

/// All `.sl` files under `dir`, sorted.
pub fn benchmark_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "sl") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn bench_one(path: &Path, cfg: &PipelineConfig) -> BenchRow {
    let t = Instant::now();
    let category = path
        .parent()
        .and_then(Path::file_name)
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let mut row = BenchRow {
        file: path.to_path_buf(),
        category,
        status: "parse_error".into(),
        wall: Duration::ZERO,
        final_bound: None,
        phase: None,
        error: None,
    };
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|text| parse_problem(&text).map_err(|e| e.to_string()));
    let p = match parsed {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e);
            row.wall = t.elapsed();
            return row;
        }
    };
    let mut cfg = cfg.clone();
    if let (Some(dir), Some(stem)) = (&cfg.emit_bounded, path.file_stem()) {
        cfg.emit_bounded = Some(dir.join(stem));
    }
    let report = solve(&p, &cfg);
    row.wall = t.elapsed();
    row.final_bound = report.per_iteration.last().map(|it| it.bound);
    row.status = match report.outcome {
        RunOutcome::Solved { verified, phase, .. } => {
            row.phase = Some(phase);
            if verified { "solved" } else { "unverified" }.into()
        }
        RunOutcome::Failed { reason } => match reason {
            FailureReason::BoundExhausted => "bound_exhausted",
            FailureReason::TotalTimeout => "total_timeout",
            FailureReason::BackendUnavailable => "backend_unavailable",
        }
        .into(),
    };
    row
}

/// Solve every `.sl` file under `dir` with up to `jobs` files in flight.
pub fn run_benchmarks(dir: &Path, cfg: &PipelineConfig, jobs: usize) -> std::io::Result<BenchmarkReport> {
    let files = benchmark_files(dir)?;
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, files.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let row = bench_one(path, cfg);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows = rows.into_inner().unwrap().into_iter().map(|r| r.expect("every file ran")).collect();
    Ok(BenchmarkReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Sort, SynthFun};

    fn cfg() -> PipelineConfig {
        PipelineConfig {
            generalization_limits: EnumLimits {
                max_size: 6,
                max_candidates: 200,
                timeout: Duration::from_secs(10),
            },
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn timeouts_must_nest() {
        assert!(PipelineConfig::default().validate().is_ok());
        let bad = PipelineConfig {
            fast_synth_timeout: Duration::from_secs(100),
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn false_spec_exhausts_every_bound() {
        let p = Problem {
            synth_funs: vec![SynthFun::new("f", vec![("x".into(), Sort::Int)], Sort::Int)],
            declared_vars: vec![("x".into(), Sort::Int)],
            constraints: vec![Expr::bool(false)],
            ..Problem::default()
        };
        let cfg = PipelineConfig {
            bound: BoundConfig { b_start: 2, b_max: 4, step: 1 },
            ..cfg()
        };
        let report = solve(&p, &cfg);
        assert!(matches!(report.outcome, RunOutcome::Failed { reason: FailureReason::BoundExhausted }));
        let bounds: Vec<usize> = report.per_iteration.iter().map(|it| it.bound).collect();
        assert_eq!(bounds, vec![2, 3, 4]);
        for it in &report.per_iteration {
            assert_eq!(it.phases.len(), 1);
            assert_eq!(it.phases[0].outcome, PhaseOutcome::Infeasible);
        }
    }

    #[test]
    fn unverified_needs_consent() {
        let p = Problem {
            synth_funs: vec![SynthFun::new("f", vec![], Sort::Int)],
            constraints: vec![Expr::bool(true)],
            ..Problem::default()
        };
        let report = solve(&p, &cfg());
        assert!(matches!(report.outcome, RunOutcome::Failed { reason: FailureReason::BackendUnavailable }));
        let cfg = PipelineConfig {
            accept_unverified: true,
            ..cfg()
        };
        let report = solve(&p, &cfg);
        let RunOutcome::Solved { verified, bound, phase, .. } = report.outcome else { panic!("not solved") };
        assert!(!verified);
        assert_eq!((bound, phase), (2, SolvedBy::Syntactic));
    }

    #[test]
    fn median_of_even_rows_averages() {
        let row = |s: u64| BenchRow {
            file: PathBuf::from(format!("{s}.sl")),
            category: "c".into(),
            status: "solved".into(),
            wall: Duration::from_secs(s),
            final_bound: Some(2),
            phase: Some(SolvedBy::Syntactic),
            error: None,
        };
        let r = BenchmarkReport::from_rows(vec![row(1), row(2), row(4), row(9)]);
        assert_eq!(r.median_time, Some(3.0));
        assert_eq!(r.mean_time, Some(4.0));
        assert_eq!(r.overall.solved, 4);
        assert!(r.to_table().contains("median 3.000s"));
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use synrg::driver::{run_benchmarks, solve, PipelineConfig, RunOutcome, RunReport};
use synrg::restriction::BoundConfig;
use synrg::solvers::{SolverKind, SolverSpec};
use synrg::sygus::{parse_problem, print_define_fun};

const EXIT_VERIFIED: u8 = 0;
const EXIT_UNVERIFIED: u8 = 2;
const EXIT_FAILED: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "synrg", version, about = "Synthesize quantified array expressions from SyGuS problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and print a define-fun per synthesis function.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Solve every .sl file under a directory and print a summary table.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 2)]
    bound_start: usize,
    #[arg(long, default_value_t = 8)]
    bound_max: usize,
    #[arg(long, default_value_t = 1)]
    bound_step: usize,
    /// Seconds for the bounded query without a template grammar.
    #[arg(long, default_value_t = 2.0)]
    fast_timeout: f64,
    /// Seconds for the bounded query with the template grammar.
    #[arg(long, default_value_t = 60.0)]
    template_timeout: f64,
    #[arg(long, default_value_t = 300.0)]
    total_timeout: f64,
    /// SyGuS solver command; the query file is appended.
    #[arg(long)]
    synth_solver: Option<String>,
    /// SMT solver command; the query file is appended.
    #[arg(long)]
    smt_solver: Option<String>,
    /// Use only the built-in enumerator and finite checks.
    #[arg(long)]
    internal_only: bool,
    /// Report candidates that passed only finite checks, marked UNVERIFIED.
    #[arg(long)]
    accept_unverified: bool,
    /// Write the bounded query of every bound tried into this directory.
    #[arg(long)]
    emit_bounded: Option<PathBuf>,
    /// Print the array property classification of the result.
    #[arg(long)]
    fragment_report: bool,
    /// Print the match sets of every syntactic generalization.
    #[arg(long)]
    trace_generalization: bool,
    #[arg(long)]
    json: bool,
}

fn seconds(s: f64, what: &str) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|_| format!("invalid {what}: {s}"))
}

impl Opts {
    fn config(&self) -> Result<PipelineConfig, String> {
        let mut cfg = PipelineConfig {
            bound: BoundConfig {
                b_start: self.bound_start,
                b_max: self.bound_max,
                step: self.bound_step,
            },
            fast_synth_timeout: seconds(self.fast_timeout, "fast timeout")?,
            template_synth_timeout: seconds(self.template_timeout, "template timeout")?,
            total_timeout: seconds(self.total_timeout, "total timeout")?,
            accept_unverified: self.accept_unverified,
            trace_generalization: self.trace_generalization,
            emit_bounded: self.emit_bounded.clone(),
            ..PipelineConfig::default()
        };
        cfg.generalization_limits.timeout = cfg.total_timeout;
        let spec = |cmd: &Option<String>, kind, timeout| {
            cmd.as_deref()
                .map(|c| SolverSpec::new(c, kind, timeout).map_err(|e| e.to_string()))
                .transpose()
        };
        cfg.synth_solver = spec(&self.synth_solver, SolverKind::Synthesis, cfg.template_synth_timeout)?;
        cfg.smt_solver = spec(&self.smt_solver, SolverKind::Smt, cfg.verify_timeout)?;
        if self.internal_only {
            cfg.synth_solver = None;
            cfg.smt_solver = None;
        } else {
            cfg = cfg.detect_backends();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_trace(report: &RunReport) {
    for it in &report.per_iteration {
        for m in &it.match_sets {
            let members: Vec<String> = m.members.iter().map(ToString::to_string).collect();
            eprintln!(
                "b={} {} [{}] spanning={} -> {}",
                it.bound,
                m.connective,
                members.join(", "),
                m.spanning,
                m.quantified.as_ref().map_or_else(|| "kept".into(), ToString::to_string)
            );
        }
    }
}

fn run_solve(file: &Path, opts: &Opts) -> Result<u8, String> {
    let cfg = opts.config()?;
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let p = parse_problem(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let report = solve(&p, &cfg);
    if opts.trace_generalization {
        print_trace(&report);
    }
    let code = match &report.outcome {
        RunOutcome::Solved { bindings, verified, .. } => {
            if !verified {
                println!("; UNVERIFIED: passed finite checks only");
            }
            for f in &p.synth_funs {
                println!("{}", print_define_fun(f, &bindings[&f.name]));
            }
            if *verified {
                EXIT_VERIFIED
            } else {
                EXIT_UNVERIFIED
            }
        }
        RunOutcome::Failed { reason } => {
            eprintln!("synrg: no solution ({})", serde_json::to_value(reason).unwrap().as_str().unwrap_or("failed"));
            EXIT_FAILED
        }
    };
    if opts.fragment_report {
        eprintln!("{}", serde_json::to_string_pretty(&report.fragment).unwrap());
    }
    if opts.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    }
    Ok(code)
}

fn run_bench(dir: &Path, opts: &Opts, jobs: usize) -> Result<u8, String> {
    let cfg = opts.config()?;
    let report = run_benchmarks(dir, &cfg, jobs).map_err(|e| format!("{}: {e}", dir.display()))?;
    if opts.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        print!("{}", report.to_table());
    }
    Ok(EXIT_VERIFIED)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { file, opts } => run_solve(file, opts),
        Command::Bench { dir, opts, jobs } => run_bench(dir, opts, *jobs),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("synrg: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

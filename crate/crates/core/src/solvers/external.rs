//! Running solver binaries as subprocesses.
//!
//! Each query goes to a fresh temporary file passed as the last argument.
//! The child leads its own process group so that a timeout can kill
//! everything it spawned, and it is always waited on before returning.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverKind {
    Synthesis,
    Smt,
}

impl SolverKind {
    pub fn env_var(self) -> &'static str {
        match self {
            SolverKind::Synthesis => "SYNRG_SYNTH_SOLVER",
            SolverKind::Smt => "SYNRG_SMT_SOLVER",
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            SolverKind::Synthesis => ".sl",
            SolverKind::Smt => ".smt2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverSpec {
    /// Program followed by fixed arguments; the query file is appended.
    pub command: Vec<String>,
    pub kind: SolverKind,
    pub wall_timeout: Duration,
}

impl SolverSpec {
    /// `command` is split on whitespace.
    pub fn new(command: &str, kind: SolverKind, wall_timeout: Duration) -> Result<Self, SolverError> {
        let command: Vec<String> = command.split_whitespace().map(String::from).collect();
        if command.is_empty() {
            return Err(SolverError::BackendUnavailable("empty solver command".into()));
        }
        if wall_timeout.is_zero() {
            return Err(SolverError::BackendUnavailable("solver timeout must be positive".into()));
        }
        Ok(SolverSpec {
            command,
            kind,
            wall_timeout,
        })
    }

    /// The command named by the kind's environment variable, if set.
    pub fn from_env(kind: SolverKind, wall_timeout: Duration) -> Option<Self> {
        let cmd = std::env::var(kind.env_var()).ok()?;
        SolverSpec::new(&cmd, kind, wall_timeout).ok()
    }

    pub fn with_timeout(&self, wall_timeout: Duration) -> Self {
        SolverSpec {
            wall_timeout,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutput {
    Finished { stdout: String, status: ExitStatus },
    TimedOut,
}

const POLL: Duration = Duration::from_millis(2);

fn kill_group(pid: u32) {
    // SAFETY: signalling a process group has no memory-safety preconditions;
    // a group that already exited yields ESRCH, which is ignored.
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

/// Run `spec` on `query` and collect its standard output.
pub fn run_solver(spec: &SolverSpec, query: &str) -> Result<RunOutput, SolverError> {
    let unavailable = |e: std::io::Error| SolverError::BackendUnavailable(format!("{}: {e}", spec.command[0]));
    let mut file = tempfile::Builder::new()
        .prefix("synrg-")
        .suffix(spec.kind.suffix())
        .tempfile()
        .map_err(unavailable)?;
    file.write_all(query.as_bytes()).map_err(unavailable)?;
    file.flush().map_err(unavailable)?;

    let mut child = Command::new(&spec.command[0])
        .args(&spec.command[1..])
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()
        .map_err(unavailable)?;
    let pid = child.id();
    let mut out = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = out.read_to_string(&mut s);
        s
    });

    let deadline = Instant::now() + spec.wall_timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => break None,
            Ok(None) => thread::sleep(POLL),
            Err(_) => break None,
        }
    };
    // Stragglers the solver forked would otherwise keep the pipe open.
    kill_group(pid);
    if status.is_none() {
        let _ = child.wait();
    }
    let stdout = reader.join().unwrap_or_default();
    match status {
        None => Ok(RunOutput::TimedOut),
        Some(status) if !status.success() && stdout.trim().is_empty() => Err(SolverError::BackendUnavailable(
            format!("{} exited with {status} and no output", spec.command[0]),
        )),
        Some(status) => Ok(RunOutput::Finished { stdout, status }),
    }
}

/// First executable called `name` on `PATH`.
pub fn find_on_path(name: &str) -> Option<std::path::PathBuf> {
    use std::os::unix::fs::PermissionsExt;
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join(name))
        .find(|p| p.metadata().is_ok_and(|m| m.is_file() && m.permissions().mode() & 0o111 != 0))
}

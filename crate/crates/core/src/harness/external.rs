//! Driving external SAT solvers that follow the SAT-competition conventions.

use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::RecordVerdict;
use crate::formula::Formula;
use crate::io::dimacs::write_dimacs;
use crate::io::drat::{read_drat, DratProof};

const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// An external solver binary with an argument template. `{instance}` and
/// `{proof}` in an argument are replaced by the respective paths; arguments
/// mentioning `{proof}` are dropped when no proof is requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub executable: PathBuf,
    pub args: Vec<String>,
}

impl ExternalSolver {
    /// Instance path first, proof path as the trailing argument.
    pub fn new(executable: impl Into<PathBuf>) -> Self {
        ExternalSolver { executable: executable.into(), args: vec!["{instance}".into(), "{proof}".into()] }
    }

    pub fn with_args(executable: impl Into<PathBuf>, args: Vec<String>) -> Self {
        ExternalSolver { executable: executable.into(), args }
    }

    pub fn id(&self) -> String {
        let name = self.executable.file_name().map_or_else(
            || self.executable.to_string_lossy().into_owned(),
            |n| n.to_string_lossy().into_owned(),
        );
        format!("external:{name}")
    }

    fn command_args(&self, instance: &Path, proof: Option<&Path>) -> Vec<String> {
        let instance = instance.to_string_lossy();
        self.args
            .iter()
            .filter_map(|arg| {
                if arg.contains("{proof}") {
                    let proof = proof?.to_string_lossy();
                    Some(arg.replace("{proof}", &proof).replace("{instance}", &instance))
                } else {
                    Some(arg.replace("{instance}", &instance))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalRun {
    pub verdict: RecordVerdict,
    /// Whole process lifetime, startup included.
    pub wall_time: Duration,
    pub exit_code: Option<i32>,
    pub proof: Option<DratProof>,
    pub note: Option<String>,
}

impl ExternalRun {
    fn failed(wall_time: Duration, note: String) -> Self {
        ExternalRun { verdict: RecordVerdict::Error, wall_time, exit_code: None, proof: None, note: Some(note) }
    }
}

/// Runs `solver` on a DIMACS file. Exit code 10 or an `s SATISFIABLE` line
/// means SAT, exit code 20 or `s UNSATISFIABLE` means UNSAT. The process is
/// killed once `timeout` elapses. When the answer is UNSAT and `proof_file`
/// exists afterwards it is parsed as text DRAT.
pub fn run_external_solver(
    solver: &ExternalSolver,
    instance_file: &Path,
    proof_file: Option<&Path>,
    timeout: Duration,
) -> ExternalRun {
    let mut stdout = match tempfile::tempfile() {
        Ok(f) => f,
        Err(e) => return ExternalRun::failed(Duration::ZERO, format!("cannot create output buffer: {e}")),
    };
    let sink = match stdout.try_clone() {
        Ok(f) => f,
        Err(e) => return ExternalRun::failed(Duration::ZERO, format!("cannot create output buffer: {e}")),
    };
    let start = Instant::now();
    let spawned = Command::new(&solver.executable)
        .args(solver.command_args(instance_file, proof_file))
        .stdin(Stdio::null())
        .stdout(Stdio::from(sink))
        .stderr(Stdio::null())
        .spawn();
    let mut child = match spawned {
        Ok(c) => c,
        Err(e) => {
            return ExternalRun::failed(start.elapsed(), format!("cannot start {}: {e}", solver.executable.display()))
        }
    };
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return ExternalRun {
                    verdict: RecordVerdict::Timeout,
                    wall_time: start.elapsed(),
                    exit_code: None,
                    proof: None,
                    note: None,
                };
            }
            Ok(None) => thread::sleep(POLL_INTERVAL),
            Err(e) => {
                let _ = child.kill();
                return ExternalRun::failed(start.elapsed(), format!("lost track of the solver process: {e}"));
            }
        }
    };
    let wall_time = start.elapsed();

    let mut output = String::new();
    if stdout.seek(SeekFrom::Start(0)).is_ok() {
        let _ = stdout.read_to_string(&mut output);
    }
    let status_line = output.lines().find_map(|l| match l.trim_end() {
        "s SATISFIABLE" => Some(RecordVerdict::Sat),
        "s UNSATISFIABLE" => Some(RecordVerdict::Unsat),
        _ => None,
    });
    let exit_code = status.code();
    let verdict = match (exit_code, status_line) {
        (Some(10), Some(RecordVerdict::Unsat)) | (Some(20), Some(RecordVerdict::Sat)) => None,
        (Some(10), _) | (_, Some(RecordVerdict::Sat)) => Some(RecordVerdict::Sat),
        (Some(20), _) | (_, Some(RecordVerdict::Unsat)) => Some(RecordVerdict::Unsat),
        _ => None,
    };
    let Some(verdict) = verdict else {
        let mut run = ExternalRun::failed(wall_time, format!("no consistent answer (exit status {status})"));
        run.exit_code = exit_code;
        return run;
    };

    let mut run = ExternalRun { verdict, wall_time, exit_code, proof: None, note: None };
    if verdict == RecordVerdict::Unsat {
        if let Some(path) = proof_file.filter(|p| p.exists()) {
            match File::open(path).map_err(|e| e.to_string()).and_then(|f| read_drat(BufReader::new(f)).map_err(|e| e.to_string())) {
                Ok(proof) => run.proof = Some(proof),
                Err(e) => run.note = Some(format!("unreadable proof: {e}")),
            }
        }
    }
    run
}

/// Writes `formula` to a temporary DIMACS file and runs `solver` on it.
pub(super) fn solve_formula(solver: &ExternalSolver, formula: &Formula, emit_proof: bool, timeout: Duration) -> ExternalRun {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return ExternalRun::failed(Duration::ZERO, format!("cannot create a scratch directory: {e}")),
    };
    let instance = dir.path().join("instance.cnf");
    let written = File::create(&instance).and_then(|f| write_dimacs(formula, std::io::BufWriter::new(f)));
    if let Err(e) = written {
        return ExternalRun::failed(Duration::ZERO, format!("cannot write the instance: {e}"));
    }
    let proof = emit_proof.then(|| dir.path().join("proof.drat"));
    run_external_solver(solver, &instance, proof.as_deref(), timeout)
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    fn instance(dir: &Path) -> PathBuf {
        let path = dir.join("i.cnf");
        std::fs::write(&path, "p cnf 1 1\n1 0\n").unwrap();
        path
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let inst = instance(dir.path());
        let sat = ExternalSolver::new(script(dir.path(), "sat", "exit 10"));
        assert_eq!(run_external_solver(&sat, &inst, None, Duration::from_secs(10)).verdict, RecordVerdict::Sat);
        let odd = ExternalSolver::new(script(dir.path(), "odd", "exit 3"));
        let run = run_external_solver(&odd, &inst, None, Duration::from_secs(10));
        assert_eq!((run.verdict, run.exit_code), (RecordVerdict::Error, Some(3)));
    }

    #[test]
    fn status_lines() {
        let dir = tempfile::tempdir().unwrap();
        let inst = instance(dir.path());
        let s = ExternalSolver::new(script(dir.path(), "s", "echo 'c hello'\necho 's UNSATISFIABLE'"));
        assert_eq!(run_external_solver(&s, &inst, None, Duration::from_secs(10)).verdict, RecordVerdict::Unsat);
        let s = ExternalSolver::new(script(dir.path(), "t", "echo 's SATISFIABLE'\necho 'v 1 0'"));
        assert_eq!(run_external_solver(&s, &inst, None, Duration::from_secs(10)).verdict, RecordVerdict::Sat);
    }

    #[test]
    fn reads_proof_from_trailing_argument() {
        let dir = tempfile::tempdir().unwrap();
        let inst = instance(dir.path());
        let s = ExternalSolver::new(script(dir.path(), "u", "printf '1 0\\n0\\n' > \"$2\"\nexit 20"));
        let proof_path = dir.path().join("p.drat");
        let run = run_external_solver(&s, &inst, Some(&proof_path), Duration::from_secs(10));
        assert_eq!(run.verdict, RecordVerdict::Unsat);
        assert_eq!(run.proof.unwrap().len(), 2);
    }

    #[test]
    fn kills_on_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let inst = instance(dir.path());
        let s = ExternalSolver::new(script(dir.path(), "slow", "exec sleep 30"));
        let run = run_external_solver(&s, &inst, None, Duration::from_millis(200));
        assert_eq!(run.verdict, RecordVerdict::Timeout);
        assert!(run.wall_time < Duration::from_millis(220), "{:?}", run.wall_time);
    }

    #[test]
    fn missing_executable() {
        let dir = tempfile::tempdir().unwrap();
        let inst = instance(dir.path());
        let run = run_external_solver(&ExternalSolver::new(dir.path().join("nope")), &inst, None, Duration::from_secs(1));
        assert_eq!(run.verdict, RecordVerdict::Error);
        assert!(run.note.unwrap().contains("cannot start"));
    }

    #[test]
    fn template_drops_proof_argument() {
        let s = ExternalSolver::with_args("x", vec!["--in={instance}".into(), "--proof={proof}".into(), "-q".into()]);
        assert_eq!(s.command_args(Path::new("a.cnf"), None), vec!["--in=a.cnf", "-q"]);
        assert_eq!(s.command_args(Path::new("a.cnf"), Some(Path::new("p"))), vec!["--in=a.cnf", "--proof=p", "-q"]);
        assert_eq!(s.id(), "external:x");
    }
}

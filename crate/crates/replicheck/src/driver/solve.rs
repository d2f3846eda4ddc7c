//! Dispatching a solver query and reading back the model.
//!
//! Two backends share one contract: feed the script in, get a status and a
//! (possibly empty) symbol-to-value map back. The external backend runs
//! `<solver> <script-file>` and parses the printed `define-fun` forms; the
//! builtin backend drives the linked solver library in-process, so the
//! tool works with no solver installed. `resolve_backend` picks one from
//! the `--solver` flag, the `REPLICHECK_SOLVER` environment variable, a
//! `z3` binary on PATH, or the builtin, in that order.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::encoder::Sort;

pub const SOLVER_ENV: &str = "REPLICHECK_SOLVER";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelValue {
    Int(i64),
    Bool(bool),
}

impl ModelValue {
    pub fn as_int(self) -> Option<i64> {
        match self {
            ModelValue::Int(v) => Some(v),
            ModelValue::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            ModelValue::Bool(v) => Some(v),
            ModelValue::Int(_) => None,
        }
    }
}

pub type Model = BTreeMap<String, ModelValue>;

#[derive(Debug)]
pub struct SolverVerdict {
    pub status: SolveStatus,
    pub model: Model,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    External(PathBuf),
    Builtin,
}

impl Backend {
    pub fn describe(&self) -> String {
        match self {
            Backend::External(p) => p.display().to_string(),
            Backend::Builtin => "builtin".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("failed to run solver `{0}`: {1}")]
    Spawn(String, std::io::Error),
    #[error("could not write solver script: {0}")]
    Script(std::io::Error),
    #[error("solver produced no sat/unsat/unknown verdict; stderr: {0}")]
    NoVerdict(String),
    #[error("malformed model output: {0}")]
    BadModel(String),
}

/// Picks the backend: explicit flag, then the environment, then a `z3`
/// binary on PATH, then the builtin library. The name `builtin` always
/// selects the linked solver.
pub fn resolve_backend(flag: Option<&str>) -> Backend {
    let named = flag
        .map(str::to_string)
        .or_else(|| std::env::var(SOLVER_ENV).ok())
        .filter(|s| !s.trim().is_empty());
    match named.as_deref() {
        Some("builtin") => Backend::Builtin,
        Some(path) => Backend::External(PathBuf::from(path)),
        None => match find_on_path("z3") {
            Some(p) => Backend::External(p),
            None => Backend::Builtin,
        },
    }
}

fn find_on_path(bin: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path) {
        let cand = dir.join(bin);
        if cand.is_file() {
            return Some(cand);
        }
    }
    None
}

/// Solves `script`. `symbols` lists every constant the caller may want
/// from the model (the builtin backend can only evaluate named constants).
pub fn solve(
    script: &str,
    symbols: &[(String, Sort)],
    backend: &Backend,
    timeout: Duration,
) -> Result<SolverVerdict, SolveError> {
    let start = Instant::now();
    let mut verdict = match backend {
        Backend::External(path) => solve_external(script, path, timeout)?,
        Backend::Builtin => solve_builtin(script, symbols, timeout),
    };
    verdict.wall = start.elapsed();
    Ok(verdict)
}

// -- external process ------------------------------------------------------

static SCRIPT_SEQ: AtomicU64 = AtomicU64::new(0);

fn solve_external(
    script: &str,
    solver: &Path,
    timeout: Duration,
) -> Result<SolverVerdict, SolveError> {
    let file = std::env::temp_dir().join(format!(
        "replicheck-{}-{}.smt2",
        std::process::id(),
        SCRIPT_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&file, script).map_err(SolveError::Script)?;
    let result = run_external(solver, &file, timeout);
    let _ = std::fs::remove_file(&file);
    result
}

fn run_external(
    solver: &Path,
    file: &Path,
    timeout: Duration,
) -> Result<SolverVerdict, SolveError> {
    let mut child = Command::new(solver)
        .arg(file)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolveError::Spawn(solver.display().to_string(), e))?;
    let mut stdout = child.stdout.take().unwrap();
    let mut stderr = child.stderr.take().unwrap();
    let out_thread = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_thread = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + timeout;
    let timed_out = loop {
        match child.try_wait() {
            Ok(Some(_)) => break false,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    break true;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(SolveError::Spawn(solver.display().to_string(), e)),
        }
    };
    let out = out_thread.join().unwrap_or_default();
    let err = err_thread.join().unwrap_or_default();
    if timed_out {
        return Ok(SolverVerdict {
            status: SolveStatus::Timeout,
            model: Model::new(),
            wall: Duration::ZERO,
        });
    }
    let status = out
        .lines()
        .map(str::trim)
        .find_map(|l| match l {
            "sat" => Some(SolveStatus::Sat),
            "unsat" => Some(SolveStatus::Unsat),
            "unknown" => Some(SolveStatus::Unknown),
            _ => None,
        })
        .ok_or_else(|| SolveError::NoVerdict(err.chars().take(400).collect()))?;
    let model = if status == SolveStatus::Sat { parse_model(&out)? } else { Model::new() };
    Ok(SolverVerdict { status, model, wall: Duration::ZERO })
}

// -- model text parsing ----------------------------------------------------

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c2 in chars.by_ref() {
                    if c2 == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn parse_sexps(toks: &[String]) -> Result<Vec<Sexp>, SolveError> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().ok_or_else(|| {
                    SolveError::BadModel("unbalanced parentheses".to_string())
                })?;
                match stack.last_mut() {
                    Some(top) => top.push(Sexp::List(done)),
                    None => return Err(SolveError::BadModel("unbalanced parentheses".into())),
                }
            }
            a => stack.last_mut().unwrap().push(Sexp::Atom(a.to_string())),
        }
    }
    if stack.len() != 1 {
        return Err(SolveError::BadModel("unclosed parenthesis".to_string()));
    }
    Ok(stack.pop().unwrap())
}

fn sexp_value(v: &Sexp) -> Option<ModelValue> {
    match v {
        Sexp::Atom(a) => match a.as_str() {
            "true" => Some(ModelValue::Bool(true)),
            "false" => Some(ModelValue::Bool(false)),
            n => n.parse::<i64>().ok().map(ModelValue::Int),
        },
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(minus), Sexp::Atom(n)] if minus == "-" => {
                n.parse::<i64>().ok().map(|v| ModelValue::Int(-v))
            }
            _ => None,
        },
    }
}

/// Extracts every `(define-fun name () Sort value)` in the output,
/// whether or not the solver wraps them in a `(model ...)` form.
fn parse_model(out: &str) -> Result<Model, SolveError> {
    // Skip everything before the model starts: verdict lines and chatter.
    let body: String = out
        .lines()
        .filter(|l| {
            let t = l.trim();
            t != "sat" && t != "unsat" && t != "unknown"
        })
        .collect::<Vec<_>>()
        .join("\n");
    let sexps = parse_sexps(&tokenize(&body))?;
    let mut model = Model::new();
    collect_defines(&sexps, &mut model);
    Ok(model)
}

fn collect_defines(sexps: &[Sexp], model: &mut Model) {
    for s in sexps {
        if let Sexp::List(items) = s {
            if let [Sexp::Atom(df), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(_sort), value] =
                items.as_slice()
            {
                if df == "define-fun" && args.is_empty() {
                    if let Some(v) = sexp_value(value) {
                        model.insert(name.clone(), v);
                        continue;
                    }
                }
            }
            collect_defines(items, model);
        }
    }
}

// -- builtin library -------------------------------------------------------

fn solve_builtin(script: &str, symbols: &[(String, Sort)], timeout: Duration) -> SolverVerdict {
    let mut cfg = z3::Config::new();
    let ms = timeout.as_millis().min(u128::from(u32::MAX)) as u64;
    cfg.set_param_value("timeout", &ms.to_string());
    let ctx = z3::Context::new(&cfg);
    let solver = z3::Solver::new(&ctx);
    // The solver API takes assertions only; command forms stay in the
    // emitted script for external solvers.
    let body: String = script
        .lines()
        .filter(|l| {
            let t = l.trim_start();
            !(t.starts_with("(set-option")
                || t.starts_with("(set-logic")
                || t.starts_with("(check-sat")
                || t.starts_with("(get-model"))
        })
        .collect::<Vec<_>>()
        .join("\n");
    solver.from_string(body);
    let started = Instant::now();
    let status = match solver.check() {
        z3::SatResult::Sat => SolveStatus::Sat,
        z3::SatResult::Unsat => SolveStatus::Unsat,
        z3::SatResult::Unknown => {
            if started.elapsed() >= timeout {
                SolveStatus::Timeout
            } else {
                SolveStatus::Unknown
            }
        }
    };
    let mut model = Model::new();
    if status == SolveStatus::Sat {
        if let Some(m) = solver.get_model() {
            for (name, sort) in symbols {
                match sort {
                    Sort::Int => {
                        let c = z3::ast::Int::new_const(&ctx, name.as_str());
                        if let Some(v) = m.eval(&c, true).and_then(|v| v.as_i64()) {
                            model.insert(name.clone(), ModelValue::Int(v));
                        }
                    }
                    Sort::Bool => {
                        let c = z3::ast::Bool::new_const(&ctx, name.as_str());
                        if let Some(v) = m.eval(&c, true).and_then(|v| v.as_bool()) {
                            model.insert(name.clone(), ModelValue::Bool(v));
                        }
                    }
                }
            }
        }
    }
    SolverVerdict { status, model, wall: Duration::ZERO }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_text_round_trips() {
        // [TRIVIAL] both the wrapped and the bare define-fun shapes parse.
        let out = "sat\n(model\n  (define-fun x () Int 4)\n  (define-fun neg () Int (- 7))\n  (define-fun b () Bool true)\n)\n";
        let m = parse_model(out).unwrap();
        assert_eq!(m["x"], ModelValue::Int(4));
        assert_eq!(m["neg"], ModelValue::Int(-7));
        assert_eq!(m["b"], ModelValue::Bool(true));
        let bare = "sat\n(\n  (define-fun x () Int 12)\n)\n";
        assert_eq!(parse_model(bare).unwrap()["x"], ModelValue::Int(12));
    }

    #[test]
    fn builtin_solves_a_tiny_script() {
        // [TRIVIAL] end-to-end smoke test of the in-process backend.
        let script = "(set-logic QF_LIA)\n(declare-const x Int)\n(declare-const b Bool)\n(assert (and b (> x 3) (< x 5)))\n(check-sat)\n(get-model)\n";
        let syms = vec![("x".to_string(), Sort::Int), ("b".to_string(), Sort::Bool)];
        let v = solve(script, &syms, &Backend::Builtin, Duration::from_secs(10)).unwrap();
        assert_eq!(v.status, SolveStatus::Sat);
        assert_eq!(v.model["x"], ModelValue::Int(4));
        assert_eq!(v.model["b"], ModelValue::Bool(true));
    }

    #[test]
    fn builtin_reports_unsat() {
        let script = "(declare-const x Int)\n(assert (and (> x 1) (< x 1)))\n";
        let v = solve(script, &[], &Backend::Builtin, Duration::from_secs(10)).unwrap();
        assert_eq!(v.status, SolveStatus::Unsat);
    }

    #[test]
    fn backend_resolution_prefers_explicit_choice() {
        assert_eq!(resolve_backend(Some("builtin")), Backend::Builtin);
        assert_eq!(
            resolve_backend(Some("/opt/solvers/mysolver")),
            Backend::External(PathBuf::from("/opt/solvers/mysolver"))
        );
    }
}

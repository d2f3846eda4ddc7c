//! Command-line surface: check one (library, axiom, policy, k) query, run
//! the weakest-policy search, or exhaustively simulate a small history.
//!
//! Exit codes: 0 = no violation found, 1 = violation found, 2 = solver
//! inconclusive (unknown/timeout), anything above 2 = usage or tool error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use replicheck::axioms::{self, AxiomName};
use replicheck::dsl::{parse_library, LibraryDef};
use replicheck::driver::{
    self, find_violation, resolve_backend, validate_witness, CheckConfig, CheckOutcome,
    SearchConfig, Witness,
};
use replicheck::policies::Policy;
use replicheck::store::{enumerate_executions, History};

mod render;

#[derive(Parser)]
#[command(
    name = "replicheck",
    about = "Bounded violation detection for concurrent data structures on weakly consistent replicated stores"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for a bounded execution violating one axiom under a policy.
    Check(CheckArgs),
    /// Find the weakest consistency policies satisfying each axiom.
    Search(SearchArgs),
    /// Exhaustively enumerate the outcomes of a concrete history.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Library source file (.rdsl).
    file: PathBuf,
    /// Axiom to check (addrem, injective, empty-so, empty-hb, lifo1, lifo2,
    /// fifo1, fifo2, exchange).
    #[arg(long)]
    axiom: Option<String>,
    /// Consistency policy, e.g. `ec`, `mw+mr`, `cc`.
    #[arg(long, default_value = "ec")]
    policy: String,
    /// Invocation bound.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Loop unroll bound.
    #[arg(long, default_value_t = 1)]
    unroll: u32,
    /// Per-query solver timeout in seconds.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    /// Output format: text or json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Solver: a binary path, or `builtin` for the linked solver.
    #[arg(long)]
    solver: Option<String>,
    /// Validate and render a previously saved witness instead of solving.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Where to write the witness JSON on violation.
    #[arg(long, default_value = "witness.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    file: PathBuf,
    /// Restrict the search to one axiom (default: all applicable).
    #[arg(long)]
    axiom: Option<String>,
    /// Largest invocation bound to sweep.
    #[arg(long, default_value_t = 6)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    unroll: u32,
    /// Per-query solver timeout in seconds.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    /// Overall time budget in seconds (per axiom).
    #[arg(long, default_value_t = 3600)]
    budget: u64,
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    solver: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Concrete history, e.g. `s1:push(1);s2:pop`.
    #[arg(long)]
    history: String,
    #[arg(long, default_value = "ec")]
    policy: String,
    #[arg(long, default_value_t = 1)]
    unroll: u32,
    /// Cap on total store events per execution.
    #[arg(long, default_value_t = replicheck::store::DEFAULT_EVENT_CAP)]
    event_cap: usize,
    #[arg(long, default_value = "text")]
    format: String,
    /// Seed used to pick the sample execution that gets rendered in full.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Check(a) => cmd_check(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::Simulate(a) => cmd_simulate(a),
    }
}

fn load_library(path: &PathBuf) -> Result<LibraryDef> {
    let src = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_library(&src).with_context(|| format!("cannot parse {}", path.display()))
}

fn parse_axiom(lib: &LibraryDef, s: &str) -> Result<AxiomName> {
    let name = AxiomName::parse(s)
        .with_context(|| format!("unknown axiom `{s}`"))?;
    axioms::axiom_id(lib.datatype, name)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(name)
}

fn parse_policy(s: &str) -> Result<Policy> {
    Policy::parse(s).map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_check(a: CheckArgs) -> Result<ExitCode> {
    let lib = load_library(&a.file)?;
    if let Some(path) = &a.replay {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let w: Witness = serde_json::from_str(&text).context("malformed witness file")?;
        validate_witness(&lib, &w).context("witness failed validation")?;
        match a.format.as_str() {
            "json" => println!("{}", serde_json::to_string_pretty(&w)?),
            _ => {
                println!("witness validated against {}", a.file.display());
                print!("{}", render::witness(&lib, &w));
            }
        }
        return Ok(ExitCode::from(1));
    }
    let axiom_str = a
        .axiom
        .as_deref()
        .context("--axiom is required unless --replay is given")?;
    let axiom = parse_axiom(&lib, axiom_str)?;
    let policy = parse_policy(&a.policy)?;
    let cfg = CheckConfig {
        k: a.k,
        unroll: a.unroll,
        timeout: Duration::from_secs(a.timeout),
        backend: resolve_backend(a.solver.as_deref()),
    };
    match find_violation(&lib, axiom, &policy, &cfg)? {
        CheckOutcome::Violation { witness, wall } => {
            let json = serde_json::to_string_pretty(&*witness)?;
            std::fs::write(&a.out, &json)
                .with_context(|| format!("cannot write {}", a.out.display()))?;
            match a.format.as_str() {
                "json" => println!("{json}"),
                _ => {
                    println!(
                        "violation of {} under {} at k={} ({} ms)",
                        witness.axiom,
                        witness.policy,
                        witness.k,
                        wall.as_millis()
                    );
                    print!("{}", render::witness(&lib, &witness));
                    println!("witness JSON written to {}", a.out.display());
                }
            }
            Ok(ExitCode::from(1))
        }
        CheckOutcome::NoViolation { wall } => {
            if a.format == "json" {
                println!(
                    "{}",
                    serde_json::json!({"verdict": "none", "axiom": axiom.as_str(),
                        "policy": policy.to_string(), "k": a.k, "wall_ms": wall.as_millis()})
                );
            } else {
                println!(
                    "no violation of {} under {} for k={} ({} ms)",
                    axiom.as_str(),
                    policy,
                    a.k,
                    wall.as_millis()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        CheckOutcome::Unknown { timed_out, wall } => {
            let verdict = if timed_out { "timeout" } else { "unknown" };
            if a.format == "json" {
                println!(
                    "{}",
                    serde_json::json!({"verdict": verdict, "axiom": axiom.as_str(),
                        "policy": policy.to_string(), "k": a.k, "wall_ms": wall.as_millis()})
                );
            } else {
                println!("solver {verdict} for {} under {} at k={}", axiom.as_str(), policy, a.k);
            }
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_search(a: SearchArgs) -> Result<ExitCode> {
    let lib = load_library(&a.file)?;
    let axioms: Vec<AxiomName> = match &a.axiom {
        Some(s) => vec![parse_axiom(&lib, s)?],
        None => axioms::axioms_for(lib.datatype).into_iter().map(|ax| ax.name).collect(),
    };
    let cfg = SearchConfig {
        k_min: 2,
        k_max: a.k_max,
        unroll: a.unroll,
        per_query_timeout: Duration::from_secs(a.timeout),
        budget: Duration::from_secs(a.budget),
        backend: resolve_backend(a.solver.as_deref()),
    };
    let mut reports = Vec::new();
    for ax in axioms {
        reports.push(driver::weakest_policy_search(&lib, ax, &cfg)?);
    }
    if a.format == "json" {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            let safe = if r.minimal_safe.is_empty() {
                "none found".to_string()
            } else {
                r.minimal_safe.join(", ")
            };
            println!("{:<10} weakest safe policy: {safe}", r.axiom);
            for q in &r.queries {
                println!("    {:<12} k={} {:<10} {} ms", q.policy, q.k, q.verdict, q.wall_ms);
            }
            if !r.inconclusive.is_empty() {
                println!("    inconclusive: {}", r.inconclusive.join(", "));
            }
            if r.budget_exhausted {
                println!("    (budget exhausted before the search completed)");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let lib = load_library(&a.file)?;
    let policy = parse_policy(&a.policy)?;
    let history = History::parse(&a.history).map_err(|e| anyhow::anyhow!(e))?;
    let outcome = enumerate_executions(&lib, &history, &policy, a.unroll, a.event_cap)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let violated: Vec<Vec<String>> = outcome
        .alphas
        .iter()
        .map(|alpha| {
            axioms::any_violation(alpha, lib.datatype)
                .into_iter()
                .map(|ax| ax.name.as_str().to_string())
                .collect()
        })
        .collect();
    if a.format == "json" {
        println!(
            "{}",
            serde_json::json!({
                "history": a.history,
                "policy": policy.to_string(),
                "outcomes": outcome.alphas.iter().map(render::alpha_line).collect::<Vec<_>>(),
                "violations": violated,
                "executions": outcome.executions,
                "states": outcome.states,
            })
        );
    } else {
        println!(
            "{} distinct outcomes under {} ({} executions explored)",
            outcome.alphas.len(),
            policy,
            outcome.executions
        );
        for (alpha, bad) in outcome.alphas.iter().zip(&violated) {
            if bad.is_empty() {
                println!("  {}", render::alpha_line(alpha));
            } else {
                println!("  {}   [violates {}]", render::alpha_line(alpha), bad.join(", "));
            }
        }
        let _ = a.seed; // reserved for sampling a single rendered execution
    }
    Ok(ExitCode::SUCCESS)
}

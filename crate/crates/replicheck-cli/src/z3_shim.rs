//! Minimal solver executable wrapping the linked solver library.
//!
//! Reads one SMT-LIB2 script file, prints `sat`/`unsat`/`unknown` and, on
//! sat, the model as `(define-fun ...)` forms. Exists so the external-
//! process solver path can be exercised (and tested) without any solver
//! installed on the machine.

use std::process::ExitCode;


fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: replicheck-z3 <script.smt2>");
        return ExitCode::from(3);
    };
    let script = match std::fs::read_to_string(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read {path}: {e}");
            return ExitCode::from(3);
        }
    };

    // Constants to report back, in declaration order.
    let mut symbols: Vec<(String, String)> = Vec::new();
    for line in script.lines() {
        if let Some(rest) = line.trim().strip_prefix("(declare-const ") {
            let mut it = rest.trim_end_matches(')').split_whitespace();
            if let (Some(name), Some(sort)) = (it.next(), it.next()) {
                symbols.push((name.to_string(), sort.to_string()));
            }
        }
    }

    let cfg = z3::Config::new();
    let ctx = z3::Context::new(&cfg);
    let solver = z3::Solver::new(&ctx);
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
    match solver.check() {
        z3::SatResult::Unsat => println!("unsat"),
        z3::SatResult::Unknown => println!("unknown"),
        z3::SatResult::Sat => {
            println!("sat");
            let model = solver.get_model().expect("model after sat");
            println!("(");
            for (name, sort) in &symbols {
                match sort.as_str() {
                    "Int" => {
                        let c = z3::ast::Int::new_const(&ctx, name.as_str());
                        if let Some(v) = model.eval(&c, true).and_then(|v| v.as_i64()) {
                            if v < 0 {
                                println!("  (define-fun {name} () Int (- {}))", -v);
                            } else {
                                println!("  (define-fun {name} () Int {v})");
                            }
                        }
                    }
                    "Bool" => {
                        let c = z3::ast::Bool::new_const(&ctx, name.as_str());
                        if let Some(v) = model.eval(&c, true).and_then(|v| v.as_bool()) {
                            println!("  (define-fun {name} () Bool {v})");
                        }
                    }
                    _ => {}
                }
            }
            println!(")");
        }
    }
    ExitCode::SUCCESS
}

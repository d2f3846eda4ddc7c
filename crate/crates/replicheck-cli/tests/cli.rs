//! Black-box tests of the `replicheck` binary: exit codes, JSON witness
//! round-tripping through `--replay`, and the external-solver process
//! contract (exercised via the bundled `replicheck-z3` shim).

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_replicheck"))
}

/// A scratch path for `--out` so violation runs never litter the tree.
fn scratch(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("replicheck-test-{tag}-{}.json", std::process::id()))
}

fn bench(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("benchmarks/{name}.rdsl"))
}

#[test]
fn check_reports_a_violation_with_exit_code_1() {
    let witness = scratch("violation");
    let out = bin()
        .args(["check", "--axiom", "addrem", "--policy", "ec", "--k", "2"])
        .arg("--out")
        .arg(&witness)
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("violation of addrem under ec"), "stdout: {text}");
    assert!(text.contains("history:"), "stdout: {text}");
    // The witness JSON lands on disk as well.
    assert!(witness.exists());
    std::fs::remove_file(&witness).ok();
}

#[test]
fn check_reports_no_violation_with_exit_code_0() {
    let out = bin()
        .args(["check", "--axiom", "addrem", "--policy", "cc", "--k", "2"])
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no violation"));
}

#[test]
fn json_witness_round_trips_through_replay() {
    let path = scratch("roundtrip");
    let out = bin()
        .args(["check", "--axiom", "addrem", "--policy", "ec", "--k", "2", "--format", "json"])
        .arg("--out")
        .arg(&path)
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&path, &out.stdout).unwrap();

    let replayed = bin()
        .args(["check", "--replay"])
        .arg(&path)
        .arg(bench("treiber"))
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(
        replayed.status.code(),
        Some(1),
        "stderr: {}",
        String::from_utf8_lossy(&replayed.stderr)
    );
    assert!(String::from_utf8_lossy(&replayed.stdout).contains("witness validated"));
}

#[test]
fn replay_rejects_a_witness_for_the_wrong_library() {
    let path = scratch("cross");
    let out = bin()
        .args(["check", "--axiom", "addrem", "--policy", "ec", "--k", "2", "--format", "json"])
        .arg("--out")
        .arg(&path)
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&path, &out.stdout).unwrap();

    // A stack witness cannot replay against the queue benchmark.
    let replayed = bin()
        .args(["check", "--replay"])
        .arg(&path)
        .arg(bench("hw_queue"))
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(replayed.status.code(), Some(3));
}

#[test]
fn external_solver_process_contract_works() {
    // The shim binary implements `<solver> <script-file>`; routing a check
    // through it exercises the temp-file/spawn/parse path end to end.
    let witness = scratch("external");
    let out = bin()
        .args(["check", "--axiom", "addrem", "--policy", "ec", "--k", "2"])
        .args(["--solver", env!("CARGO_BIN_EXE_replicheck-z3")])
        .arg("--out")
        .arg(&witness)
        .arg(bench("treiber"))
        .output()
        .unwrap();
    std::fs::remove_file(&witness).ok();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violation of addrem under ec"));
}

#[test]
fn simulate_prints_distinct_outcomes() {
    let out = bin()
        .args(["simulate", "--history", "s1:push(1);s2:pop", "--policy", "ec"])
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("distinct outcomes under ec"), "stdout: {text}");
    assert!(text.contains("pop"), "stdout: {text}");
}

#[test]
fn unknown_axiom_for_datatype_is_a_usage_error() {
    let out = bin()
        .args(["check", "--axiom", "fifo1", "--k", "2"])
        .arg(bench("treiber"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

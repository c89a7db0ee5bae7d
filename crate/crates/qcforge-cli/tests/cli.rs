//! End-to-end tests driving the compiled binary, exit codes included.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

const WORKED_EXAMPLE: &str = "qubits a0 a1 t toff_a0 toff_a2\n\
                    TOFFOLI a0 a1 t\n\
                    CNOT a0 toff_a0\n\
                    CNOT a1 toff_a2\n\
                    H t\n";

static DIR_SEQ: AtomicUsize = AtomicUsize::new(0);

/// Fresh scratch directory per test, unique across parallel runs.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "qcforge-cli-{}-{}-{tag}",
        std::process::id(),
        DIR_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn qcforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcforge"))
        .args(args)
        .env_remove("QCFORGE_SIM_LIMIT")
        .output()
        .expect("run qcforge")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf8")
}

#[test]
fn analyze_prints_the_metrics_line() {
    let dir = scratch("analyze");
    let input = dir.join("example.qc");
    fs::write(&input, WORKED_EXAMPLE).unwrap();
    let out = qcforge(&["analyze", input.to_str().unwrap(), "--t-dist"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(
        text.contains("qubits=5 gates=4 depth=2 t_depth=0 t=0 h=1 cnot=2 toffoli=1"),
        "unexpected metrics: {text}"
    );
    assert!(text.contains("t_dist=0,0"), "missing distribution: {text}");
}

#[test]
fn malformed_circuit_exits_2_and_names_the_line() {
    let dir = scratch("parse");
    let input = dir.join("bad.qc");
    fs::write(&input, "qubits q0\nFOO q0\n").unwrap();
    let out = qcforge(&["analyze", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 2"), "no line number in: {err}");
    assert!(err.contains("FOO"), "no offending token in: {err}");
}

#[test]
fn pipeline_transpiles_and_cancels_down_to_14_cnots() {
    let dir = scratch("pipeline");
    let input = dir.join("example.qc");
    let output = dir.join("example_opt.qc");
    fs::write(&input, WORKED_EXAMPLE).unwrap();
    let out = qcforge(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "transpile",
        "--strategy",
        "TDEPTH1_4ANC",
        "opt",
        "cancel-cnot",
        "--invariant",
        "t-count",
        "opt",
        "cancel-h",
        "--invariant",
        "t-count,qubit-count",
        "analyze",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains("qubits=7 gates=22 depth=6 t_depth=1 t=7 h=1 cnot=14 toffoli=0"),
        "final metrics wrong: {text}"
    );
    assert!(
        text.contains("pass=cancel-cnot rewrites=2 removed=CNOT:4 flags_moved=0 iterations=3"),
        "cancel-cnot report wrong: {text}"
    );
    // The written file must parse back to the same metrics.
    let round = qcforge(&["analyze", output.to_str().unwrap()]);
    assert_eq!(round.status.code(), Some(0));
    assert!(stdout_of(&round).contains("cnot=14"));
}

#[test]
fn violated_invariant_exits_3_with_the_rewrite_index() {
    let dir = scratch("invariant");
    let input = dir.join("example.qc");
    fs::write(&input, WORKED_EXAMPLE).unwrap();
    let out = qcforge(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "transpile",
        "--strategy",
        "TDEPTH1_4ANC",
        "opt",
        "drop-t",
        "--invariant",
        "t-count",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(
        err.contains("invariant t-count violated at rewrite 1: 7 -> 6"),
        "unexpected message: {err}"
    );
}

#[test]
fn bench_writes_the_csv_schema() {
    let dir = scratch("bench");
    let csv = dir.join("synth.csv");
    let out = qcforge(&["bench", "synth", "2..5", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[0],
        "scenario,n,qubits,gates,cnot,h,t,t_depth,depth,elapsed_s"
    );
    let qubit_col: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(qubit_col, ["15", "24", "41", "74"]);
    // Per-size rows echo to stdout as well.
    assert!(stdout_of(&out).contains("synth,2,15,"));
}

#[test]
fn guarded_bench_exits_4_without_force() {
    let dir = scratch("guard");
    let csv = dir.join("opt.csv");
    let out = qcforge(&["bench", "synth-opt", "2..13", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_of(&out).contains("guard"), "{}", stderr_of(&out));
    assert!(!csv.exists(), "guarded run must not write a CSV");
}

#[test]
fn unknown_subcommand_exits_1() {
    let out = qcforge(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strategies_lists_the_registered_decompositions() {
    let out = qcforge(&["strategies"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("TDEPTH1_4ANC ancillae=4 t=7 t_depth=1"), "{text}");
    assert!(text.contains("TDEPTH3_0ANC ancillae=0 t=7 t_depth=3"), "{text}");
}

#[test]
fn sim_limit_env_bounds_verification() {
    let dir = scratch("simlimit");
    let input = dir.join("example.qc");
    fs::write(&input, WORKED_EXAMPLE).unwrap();
    let args = [
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "verify",
        "--against",
        input.to_str().unwrap(),
    ];
    let ok = qcforge(&args);
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", stderr_of(&ok));
    assert!(stdout_of(&ok).contains("equivalent=true"));

    let capped = Command::new(env!("CARGO_BIN_EXE_qcforge"))
        .args(args)
        .env("QCFORGE_SIM_LIMIT", "4")
        .output()
        .expect("run qcforge");
    assert_eq!(capped.status.code(), Some(1));
    assert!(
        stderr_of(&capped).contains("limit 4"),
        "{}",
        stderr_of(&capped)
    );

    // The flag wins over the environment.
    let lifted = Command::new(env!("CARGO_BIN_EXE_qcforge"))
        .args(["pipeline", "--sim-limit", "8"])
        .args(&args[1..])
        .env("QCFORGE_SIM_LIMIT", "4")
        .output()
        .expect("run qcforge");
    assert_eq!(
        lifted.status.code(),
        Some(0),
        "stderr: {}",
        stderr_of(&lifted)
    );
}

#[test]
fn synth_step_builds_a_routed_memory() {
    let dir = scratch("synth");
    let output = dir.join("bb.qc");
    let out = qcforge(&[
        "pipeline",
        "--output",
        output.to_str().unwrap(),
        "synth",
        "bb",
        "--n",
        "2",
        "--memory",
        "0110",
        "analyze",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("qubits=15"));
    let text = fs::read_to_string(&output).unwrap();
    assert!(text.starts_with("qubits addr0 addr1 route0"), "{text}");
}

#[test]
fn steps_that_need_a_circuit_fail_without_one() {
    let out = qcforge(&["pipeline", "analyze"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("no working circuit"),
        "{}",
        stderr_of(&out)
    );
}

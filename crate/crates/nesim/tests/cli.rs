//! End-to-end tests of the `nesim` binary: exit codes, output contracts, and
//! agreement between command-line overrides and edited scenario files.

use std::process::{Command, Output};

use nesim::scenario;

fn nesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nesim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn check_graph_exit_codes_separate_pass_fail_and_inconclusive() {
    let pass = nesim(&["check-graph", "--scenario", "baseline-noadv-8"]);
    assert_eq!(exit_code(&pass), 0, "stdout: {}", stdout(&pass));
    assert!(stdout(&pass).contains("holds"));

    let fail = nesim(&["check-graph", "--scenario", "counterexample-7"]);
    assert_eq!(exit_code(&fail), 1);
    assert!(stdout(&fail).contains("information robust"));
    assert!(stdout(&fail).contains("violating set"));

    let too_large = nesim(&["check-graph", "--scenario", "sensor-96-analog"]);
    assert_eq!(exit_code(&too_large), 2, "stderr: {}", stderr(&too_large));
    assert!(stdout(&too_large).contains("inconclusive"));

    let sampled =
        nesim(&["check-graph", "--scenario", "sensor-96-analog", "--sampled", "50"]);
    assert_eq!(exit_code(&sampled), 2);
    assert!(stdout(&sampled).contains("not proven"));
}

#[test]
fn check_graph_reads_raw_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let gc = dir.path().join("gc.txt");
    let go = dir.path().join("go.txt");
    let mut gc_text = String::from("nodes 4\n");
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                gc_text.push_str(&format!("{i} <- {j}\n"));
            }
        }
    }
    std::fs::write(&gc, gc_text).unwrap();
    std::fs::write(&go, "nodes 4\n0 <- 0\n1 <- 1\n2 <- 2\n3 <- 3\n").unwrap();

    let complete_d0 = nesim(&[
        "check-graph",
        "--communication",
        gc.to_str().unwrap(),
        "--observation",
        go.to_str().unwrap(),
        "--d",
        "0",
    ]);
    assert_eq!(exit_code(&complete_d0), 0, "stderr: {}", stderr(&complete_d0));

    let complete_d1 = nesim(&[
        "check-graph",
        "--communication",
        gc.to_str().unwrap(),
        "--observation",
        go.to_str().unwrap(),
        "--d",
        "1",
        "--adversaries",
        "3",
    ]);
    assert_eq!(exit_code(&complete_d1), 1);
    assert!(stdout(&complete_d1).contains("not 3-information robust"));
}

#[test]
fn run_rejects_scenario_files_with_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = scenario::builtin_file("duo-2").unwrap().to_json_string().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc.as_object_mut().unwrap().insert("stepsize".into(), 0.01.into());
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let output = nesim(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
    assert!(stderr(&output).contains("stepsize"), "stderr: {}", stderr(&output));
}

#[test]
fn set_overrides_match_editing_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let base = scenario::builtin_file("duo-2").unwrap().to_json_string().unwrap();

    let edited_path = dir.path().join("edited.json");
    let mut doc: serde_json::Value = serde_json::from_str(&base).unwrap();
    doc["run"]["alpha"] = 0.002.into();
    doc["run"]["max_iters"] = 40.into();
    std::fs::write(&edited_path, serde_json::to_string(&doc).unwrap()).unwrap();
    let edited_csv = dir.path().join("edited.csv");
    let edited = nesim(&[
        "run",
        "--scenario",
        edited_path.to_str().unwrap(),
        "--out",
        edited_csv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&edited), 0, "stderr: {}", stderr(&edited));

    let plain_path = dir.path().join("plain.json");
    std::fs::write(&plain_path, &base).unwrap();
    let overridden_csv = dir.path().join("overridden.csv");
    let overridden = nesim(&[
        "run",
        "--scenario",
        plain_path.to_str().unwrap(),
        "--set",
        "run.alpha=0.002",
        "--set",
        "run.max_iters=40",
        "--out",
        overridden_csv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&overridden), 0, "stderr: {}", stderr(&overridden));

    let a = std::fs::read_to_string(&edited_csv).unwrap();
    let b = std::fs::read_to_string(&overridden_csv).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn strict_mode_is_the_default_and_permissive_opts_out() {
    let strict = nesim(&["run", "--scenario", "counterexample-7"]);
    assert_eq!(exit_code(&strict), 1);
    assert!(stderr(&strict).contains("assumption"), "stderr: {}", stderr(&strict));

    let permissive = nesim(&["run", "--scenario", "counterexample-7", "--permissive"]);
    assert_eq!(exit_code(&permissive), 0, "stderr: {}", stderr(&permissive));
    assert!(stdout(&permissive).contains("tolerance not reached"));
}

#[test]
fn step_size_certifies_and_rejects() {
    let ok = nesim(&["step-size", "--scenario", "duo-2", "--alpha", "0.001"]);
    assert_eq!(exit_code(&ok), 0, "stderr: {}", stderr(&ok));
    assert!(stdout(&ok).contains("certified"));

    let bad = nesim(&["step-size", "--scenario", "duo-2", "--alpha", "0.01"]);
    assert_eq!(exit_code(&bad), 1);
    assert!(stdout(&bad).contains("NOT certified"));

    let raw = nesim(&[
        "step-size", "--agents", "2", "--eta", "0.5", "--mu", "1", "--lipschitz", "1",
    ]);
    assert_eq!(exit_code(&raw), 0, "stderr: {}", stderr(&raw));
    let text = stdout(&raw);
    assert!(text.contains("pbar = 18.285714285714"), "stdout: {text}");
    assert!(stdout(&ok).contains("pbar = 18.285714285714"));
}

#[test]
fn oracle_prints_the_equilibrium_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ne.json");
    let output = nesim(&[
        "oracle",
        "--scenario",
        "counterexample-7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("agent 0: [0.4]"), "stdout: {text}");
    assert!(text.contains("agent 6: [2.0]"), "stdout: {text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["scenario"], "counterexample-7");
    let x = doc["x_star"].as_array().unwrap();
    assert_eq!(x.len(), 7);
    assert!((x[6].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(doc["mu"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_reports_the_contraction_certificates() {
    let output = nesim(&["analyze", "--scenario", "ring-6-adv1", "--rounds", "40"]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("bound holds"), "stdout: {text}");
    assert!(text.contains("recursion residual"), "stdout: {text}");
    assert!(text.contains("strictly decreasing above 1e-12: yes"), "stdout: {text}");
}

#[test]
fn analyze_flags_runs_whose_products_never_contract() {
    let output = nesim(&["analyze", "--scenario", "counterexample-7", "--rounds", "20"]);
    assert_eq!(exit_code(&output), 1);
    assert!(stdout(&output).contains("do not contract"), "stdout: {}", stdout(&output));
}

#[test]
fn checkpointed_runs_match_straight_runs() {
    let dir = tempfile::tempdir().unwrap();
    let straight_csv = dir.path().join("straight.csv");
    let straight = nesim(&[
        "run",
        "--scenario",
        "duo-2",
        "--set",
        "run.max_iters=60",
        "--out",
        straight_csv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&straight), 0, "stderr: {}", stderr(&straight));

    let ckpt = dir.path().join("half.ckpt");
    let first = nesim(&[
        "run",
        "--scenario",
        "duo-2",
        "--set",
        "run.max_iters=25",
        "--save-checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));

    let resumed_csv = dir.path().join("resumed.csv");
    let resumed = nesim(&[
        "run",
        "--scenario",
        "duo-2",
        "--set",
        "run.max_iters=60",
        "--resume",
        ckpt.to_str().unwrap(),
        "--out",
        resumed_csv.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&resumed), 0, "stderr: {}", stderr(&resumed));

    let a = std::fs::read_to_string(&straight_csv).unwrap();
    let b = std::fs::read_to_string(&resumed_csv).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_builtin_names_get_a_helpful_error() {
    let output = nesim(&["run", "--scenario", "no-such-scenario"]);
    assert_eq!(exit_code(&output), 1);
    let err = stderr(&output);
    assert!(err.contains("baseline-noadv-8"), "stderr: {err}");
}

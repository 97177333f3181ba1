//! End-to-end checks of the `ghz-aic` binary: exit codes, file outputs,
//! config-file handling, determinism across worker counts.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ghz-aic"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn simulate_then_fit_both_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate", "--qubits", "4", "--q", "0.0", "--shots", "3000", "--seed", "5", "--out",
            "runs",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let run_dir = stdout(&out).trim().to_string();
    let csv = dir.path().join(&run_dir).join("counts.csv");
    assert!(csv.exists());

    for (model, params) in [("3p", "parameters 3"), ("pi", "parameters 34")] {
        let out = run(&["fit", "--model", model, csv.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "fit {model} failed");
        let text = stdout(&out);
        assert!(text.contains("logLikelihood "), "{text}");
        assert!(text.contains(params), "{text}");
    }
    assert!(dir.path().join(&run_dir).join("counts.3p.fit.json").exists());
    assert!(dir.path().join(&run_dir).join("counts.pi.fit.json").exists());
}

#[test]
fn validation_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["simulate", "--qubits", "5", "--q", "1.5", "--shots", "2100"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["oracle-check", "--qubits", "7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Unknown flag: clap usage error, also 2.
    let out = run(&["simulate", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_check_passes_and_fault_injection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-check", "--qubits", "3", "--samples", "5"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("oracle check passed"));

    let out = bin()
        .args(["oracle-check", "--qubits", "3", "--samples", "2"])
        .env("GHZ_AIC_ORACLE_FAULT", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.conf"),
        "qubits = 3\nq = 0.0\nshots = 500\nseed = 9\nout = from_config\n",
    )
    .unwrap();
    // CLI --out overrides the config file's `out`.
    let out = run(
        &["simulate", "--config", "exp.conf", "--out", "cli_out"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).trim().starts_with("cli_out/"));
    assert!(!dir.path().join("from_config").exists());

    // Unknown keys are rejected.
    std::fs::write(
        dir.path().join("bad.conf"),
        "qubits = 3\nq = 0.0\nshots = 500\nbananas = 7\n",
    )
    .unwrap();
    let out = run(&["simulate", "--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bananas"));
}

#[test]
fn sweep_numbers_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = |workers: &'static str| {
        vec![
            "sweep", "--qubits", "3", "--q", "0.1", "--grid", "20,40", "--reps", "3", "--seed",
            "4", "--out", "runs", "--workers", workers,
        ]
    };
    let out1 = run(&args("1"), dir.path());
    assert!(out1.status.success());
    let out8 = run(&args("8"), dir.path());
    assert!(out8.status.success());
    let csv1 = std::fs::read(dir.path().join(stdout(&out1).trim()).join("sweep.csv")).unwrap();
    let csv8 = std::fs::read(dir.path().join(stdout(&out8).trim()).join("sweep.csv")).unwrap();
    assert_eq!(csv1, csv8);
    // Progress lines go to stderr, one per completed work item.
    assert!(String::from_utf8_lossy(&out1.stderr).contains("work items done"));
}

#[test]
fn scaling_q_writes_censored_flag() {
    let dir = tempfile::tempdir().unwrap();
    // Ceiling of 40 shots cannot reach any crossing: the point is censored.
    let out = run(
        &[
            "scaling-q", "--qubits", "3", "--q-list", "0.05", "--reps", "2", "--seed", "3",
            "--ceiling", "40", "--out", "runs",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary_path = dir.path().join(stdout(&out).trim()).join("summary.json");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path).unwrap()).unwrap();
    assert_eq!(summary["points"][0]["censored"], true);
    assert!(summary["points"][0]["crossingM"].is_null());
}

//! Behavioural tests for the `rvsym` binary: exit codes, report files,
//! SMT dumps, determinism, and the external solver hook.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn rvsym() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rvsym"))
}

fn guest_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("benchmarks/bin")
        .join(format!("{name}.elf"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawning rvsym");
    assert!(
        out.status.success(),
        "rvsym failed ({:?}):\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn concrete_mode_reports_guest_exit() {
    let out = run_ok(rvsym().arg(guest_path("d15_loop_sum")).args(["--mode", "concrete"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status: Exited(186)"), "stdout: {stdout}");
    assert!(stdout.contains("steps: 307"), "stdout: {stdout}");
}

#[test]
fn concrete_mode_streams_guest_output() {
    let out = run_ok(rvsym().arg(guest_path("d18_putchar")).args(["--mode", "concrete"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("RV32IM OK\n"), "stdout: {stdout}");
}

#[test]
fn explore_writes_jsonl_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.jsonl");
    let out = run_ok(
        rvsym()
            .arg(guest_path("hc2"))
            .args(["--mode", "explore", "--report"])
            .arg(&report),
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("4 completed"), "stdout: {stdout}");

    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<Value> =
        text.lines().map(|l| serde_json::from_str(l).expect("JSONL line")).collect();
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(summary["paths_completed"], 4);
    assert_eq!(summary["exhausted"], true);
    // one record per run plus the summary line
    assert_eq!(lines.len() as u64, summary["runs"].as_u64().unwrap() + 1);
    assert!(lines[0]["decisions"].is_string());
    assert!(lines[0]["inputs"].is_object());
}

/// Reports for the same image and configuration are byte-identical
/// once wall-clock fields are removed.
#[test]
fn exploration_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.jsonl"));
        run_ok(
            rvsym()
                .arg(guest_path("hc3"))
                .args(["--mode", "explore", "--report"])
                .arg(&path),
        );
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<Value> =
            text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        let summary = lines.last_mut().unwrap()["summary"].as_object_mut().unwrap();
        for field in ["solve_time_s", "exec_time_s", "total_time_s"] {
            assert!(summary.remove(field).is_some(), "summary lost {field}");
        }
        reports.push(lines);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn dump_smt_writes_queries() {
    let dir = tempfile::tempdir().unwrap();
    let dumps = dir.path().join("queries");
    run_ok(
        rvsym()
            .arg(guest_path("hc1"))
            .args(["--mode", "explore", "--dump-smt"])
            .arg(&dumps),
    );
    let mut files: Vec<PathBuf> =
        std::fs::read_dir(&dumps).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no queries dumped");
    for f in &files {
        assert_eq!(f.extension().and_then(|e| e.to_str()), Some("smt2"));
        let text = std::fs::read_to_string(f).unwrap();
        assert!(text.contains("(set-logic QF_BV)"), "{}: {text}", f.display());
        assert!(text.contains("(check-sat)"), "{}: {text}", f.display());
    }
}

#[test]
fn bench_mode_emits_table_and_report() {
    let suite = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/mini_suite.json");
    std::fs::write(
        &suite,
        r#"[{ "name": "hc2", "elf": "bin/hc2.elf", "expected_paths": 4 }]"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bench.json");
    let out = run_ok(
        rvsym()
            .args(["--mode", "bench", "--repetitions", "2", "--suite"])
            .arg(&suite)
            .arg("--report")
            .arg(&report),
    );
    std::fs::remove_file(&suite).unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "name\tpaths\texpected\tmatch\truns\tqueries\tmean_s\tstddev_s"
    );
    assert!(lines.next().unwrap().starts_with("hc2\t4\t4\tyes"), "stdout: {stdout}");

    let rows: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rows[0]["name"], "hc2");
    assert_eq!(rows[0]["paths"], 4);
    assert_eq!(rows[0]["repetitions"], 2);
}

#[test]
fn bench_mode_flags_path_mismatch() {
    let suite = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/bad_suite.json");
    std::fs::write(
        &suite,
        r#"[{ "name": "hc2", "elf": "bin/hc2.elf", "expected_paths": 5 }]"#,
    )
    .unwrap();
    let out = rvsym()
        .args(["--mode", "bench", "--repetitions", "1", "--suite"])
        .arg(&suite)
        .output()
        .unwrap();
    std::fs::remove_file(&suite).unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("hc2\t4\t5\tNO"), "stdout: {stdout}");
}

#[test]
fn usage_errors_exit_two() {
    let out = rvsym().args(["--mode", "bench"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = rvsym()
        .arg(guest_path("hc1"))
        .args(["--solver", "sorcery"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = rvsym().args(["--mode", "explore"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn engine_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("bogus.elf");
    std::fs::write(&bogus, b"\x7fELFnot really").unwrap();
    let out = rvsym().arg(&bogus).args(["--mode", "concrete"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let missing = dir.path().join("missing.elf");
    let out = rvsym().arg(&missing).args(["--mode", "explore"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn write_script(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(path, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
}

/// An external solver that refutes everything: exploration ends after
/// the seed path with every frontier slot unsat.
#[test]
fn external_solver_is_consulted() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("naysayer.sh");
    write_script(&script, "#!/bin/sh\necho unsat\n");
    let report = dir.path().join("report.jsonl");
    run_ok(
        rvsym()
            .arg(guest_path("hc1"))
            .args(["--mode", "explore", "--solver"])
            .arg(format!("external:{}", script.display()))
            .arg("--report")
            .arg(&report),
    );
    let text = std::fs::read_to_string(&report).unwrap();
    let summary: Value =
        serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["paths_completed"], 1);
    assert_eq!(summary["summary"]["unsat_targets"], 3);
    assert_eq!(summary["summary"]["exhausted"], true);
}

/// A hanging external solver runs into the per-query deadline; the
/// affected slots are recorded as unknown instead of wedging the run.
#[test]
fn external_solver_timeout_degrades_to_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("sleeper.sh");
    write_script(&script, "#!/bin/sh\nsleep 30\n");
    let report = dir.path().join("report.jsonl");
    run_ok(
        rvsym()
            .arg(guest_path("hc2"))
            .args(["--mode", "explore", "--query-timeout", "1", "--solver"])
            .arg(format!("external:{}", script.display()))
            .arg("--report")
            .arg(&report),
    );
    let text = std::fs::read_to_string(&report).unwrap();
    let summary: Value =
        serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["summary"]["paths_completed"], 1);
    assert!(summary["summary"]["unknown_targets"].as_u64().unwrap() >= 1);
    assert_eq!(summary["summary"]["exhausted"], true);
}

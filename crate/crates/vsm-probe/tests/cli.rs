//! End-to-end checks of the `vsm-probe` binary: run, score, compare, and
//! report against scripted backends in a temp workspace.

use std::path::Path;
use std::process::Command;

fn vsm_probe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vsm-probe"))
}

fn run_set(dir: &Path, name: &str, backend: &str, shuffle: bool) {
    let out = dir.join(name);
    let mut cmd = vsm_probe();
    cmd.args([
        "run",
        "--model",
        "cli-model",
        "--lang",
        "en",
        "--seeds",
        "2",
        "--backend",
        backend,
        "--no-cache",
        "--label",
        name,
        "--out",
    ])
    .arg(&out);
    if shuffle {
        cmd.arg("--shuffle");
    }
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out.join("records.jsonl").is_file());
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn run_score_compare_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    run_set(dir.path(), "set-a", "scripted:uniform:21", false);
    run_set(dir.path(), "set-b", "scripted:uniform:22", true);

    // score: stdout carries the CSV report.
    let output = vsm_probe()
        .args(["score", "--set"])
        .arg(dir.path().join("set-a"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("nation,PDI,IDV,MAS,UAI,LTO,IVR"));
    assert!(stdout.contains("South Africa,"));
    assert!(stdout.contains("recognizability_rate,1.000"));

    // score --out writes the bundle.
    let score_out = dir.path().join("score-a");
    let output = vsm_probe()
        .args(["score", "--set"])
        .arg(dir.path().join("set-a"))
        .arg("--out")
        .arg(&score_out)
        .output()
        .unwrap();
    assert!(output.status.success());
    for file in [
        "report.json",
        "report.csv",
        "nationals.csv",
        "identity_scores.csv",
    ] {
        assert!(score_out.join(file).is_file(), "missing {file}");
    }

    // compare: ss_h matrix CSV on stdout.
    let output = vsm_probe()
        .args(["compare", "--metric", "ss_h", "--sets"])
        .arg(dir.path().join("set-a"))
        .arg(dir.path().join("set-b"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("label,set-a,set-b"));
    assert_eq!(stdout.lines().count(), 3);

    // report: full bundle with matrices and the MMLU delta.
    let mmlu = dir.path().join("mmlu.csv");
    std::fs::write(&mmlu, "model,score\ncli-model,70.0\n").unwrap();
    let bundle = dir.path().join("bundle");
    let output = vsm_probe()
        .args(["report", "--sets"])
        .arg(dir.path().join("set-a"))
        .arg(dir.path().join("set-b"))
        .arg("--mmlu")
        .arg(&mmlu)
        .arg("--out")
        .arg(&bundle)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "report failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    for file in [
        "set-a.report.json",
        "set-b.report.csv",
        "set-a.identity_scores.csv",
        "matrix.dbi.csv",
        "matrix.ss.csv",
        "matrix.ss_h.csv",
        "matrix.pearson_rho.csv",
        "matrix.mmlu_delta.csv",
    ] {
        assert!(bundle.join(file).is_file(), "missing {file}");
    }
}

#[test]
fn replay_backend_requires_cache_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");

    // Record a run through the cache.
    let out_a = dir.path().join("first");
    let output = vsm_probe()
        .args([
            "run", "--model", "cli-model", "--lang", "zh", "--seeds", "2", "--backend",
            "scripted:fixed:4", "--label", "replayed",
        ])
        .arg("--cache")
        .arg(&cache)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    assert!(output.status.success());

    // Replay strictly from the cache; bytes must match.
    let out_b = dir.path().join("second");
    let output = vsm_probe()
        .args([
            "run", "--model", "cli-model", "--lang", "zh", "--seeds", "2", "--backend", "replay",
            "--label", "replayed",
        ])
        .arg("--cache")
        .arg(&cache)
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "replay failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let a = std::fs::read(out_a.join("records.jsonl")).unwrap();
    let b = std::fs::read(out_b.join("records.jsonl")).unwrap();
    assert_eq!(a, b);

    // Strict replay with an empty cache is a cache miss.
    let output = vsm_probe()
        .args([
            "run", "--model", "other-model", "--lang", "en", "--seeds", "2", "--backend", "replay",
        ])
        .arg("--cache")
        .arg(dir.path().join("empty-cache"))
        .arg("--out")
        .arg(dir.path().join("never"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no entry"), "stderr: {stderr}");
}

#[test]
fn malformed_rate_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("malformed");
    let output = vsm_probe()
        .args([
            "run",
            "--model",
            "cli-model",
            "--lang",
            "en",
            "--seeds",
            "2",
            "--backend",
            "scripted:malformed:1.0",
            "--no-cache",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("recognizability 0.0000"), "stdout: {stdout}");
}

#[test]
fn profile_backend_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.json");
    std::fs::write(&profile, r#"{"China": {"1": 5, "2": 1}}"#).unwrap();
    let out = dir.path().join("profiled");
    let output = vsm_probe()
        .args(["run", "--model", "cli-model", "--lang", "en", "--seeds", "1", "--no-cache"])
        .arg("--backend")
        .arg(format!("scripted:profile:{}", profile.display()))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "profile run failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let records = std::fs::read_to_string(out.join("records.jsonl")).unwrap();
    let china_q1 = records
        .lines()
        .find(|l| l.contains("\"China\"") && l.contains("\"question_id\":1,"))
        .unwrap();
    assert!(china_q1.contains("\"option_id\":5"), "{china_q1}");
}

#[test]
fn bad_arguments_fail_cleanly() {
    // Unknown locale.
    let output = vsm_probe()
        .args(["run", "--model", "m", "--lang", "fr", "--out", "/tmp/never", "--backend",
               "scripted:fixed:3"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown locale"), "stderr: {stderr}");

    // Unknown metric.
    let output = vsm_probe()
        .args(["compare", "--metric", "cosine", "--sets", "/tmp/a", "/tmp/b"])
        .output()
        .unwrap();
    assert!(!output.status.success());

    // http backend without an endpoint.
    let output = vsm_probe()
        .args(["run", "--model", "m", "--lang", "en", "--out", "/tmp/never"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--endpoint"), "stderr: {stderr}");
}

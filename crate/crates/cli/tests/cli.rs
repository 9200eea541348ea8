use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sonoptic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sonoptic"))
        .args(args)
        .current_dir(dir)
        .env_remove("SONOPTIC_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = sonoptic(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn small_benchmark(dir: &Path, name: &str) {
    fs::write(dir.join("spec.json"), r#"{"per_class": 8}"#).unwrap();
    ok(dir, &["synth", "--spec", "spec.json", "--out", name]);
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = sonoptic(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn failures_print_one_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = sonoptic(dir.path(), &["features", "--manifest", "missing.jsonl", "--out", "f.csv"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error: MissingFile: "), "{stderr}");
    assert!(!dir.path().join("f.csv").exists());
}

#[test]
fn bad_spec_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), r#"{"per_class": 0}"#).unwrap();
    let out = sonoptic(dir.path(), &["synth", "--spec", "spec.json", "--out", "bench"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: InvalidSpec: "));
    assert!(!dir.path().join("bench").exists());
}

#[test]
fn pipeline_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for run in ["a", "b"] {
        small_benchmark(d, run);
        let manifest = format!("{run}/manifest.jsonl");
        ok(d, &["features", "--manifest", &manifest, "--out", &format!("{run}.csv")]);
        ok(d, &["train", "--manifest", &manifest, "--model", &format!("{run}.json")]);
        ok(d, &[
            "evaluate", "--manifest", &manifest, "--trials", "4", "--split", "0.7",
            "--sensitivity-draws", "3", "--out", &format!("{run}-report.json"),
        ]);
    }
    let read = |p: &str| fs::read(d.join(p)).unwrap();
    assert_eq!(read("a/manifest.jsonl"), read("b/manifest.jsonl"));
    for entry in fs::read_dir(d.join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap();
        assert_eq!(read(&format!("a/{name}")), read(&format!("b/{name}")), "{name}");
    }
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a-report.json"), read("b-report.json"));
}

#[test]
fn seed_env_changes_the_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_benchmark(d, "zero");
    let out = Command::new(env!("CARGO_BIN_EXE_sonoptic"))
        .args(["synth", "--spec", "spec.json", "--out", "seven"])
        .current_dir(d)
        .env("SONOPTIC_SEED", "7")
        .output()
        .unwrap();
    assert!(out.status.success());
    ok(d, &["synth", "--spec", "spec.json", "--out", "flag", "--seed", "7"]);
    let read = |p: &str| fs::read(d.join(p)).unwrap();
    assert_ne!(read("zero/m-000_sas.pgm"), read("seven/m-000_sas.pgm"));
    assert_eq!(read("flag/m-000_sas.pgm"), read("seven/m-000_sas.pgm"));
}

#[test]
fn zero_optic_weight_matches_sas_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_benchmark(d, "bench");
    ok(d, &["train", "--manifest", "bench/manifest.jsonl", "--model", "model.json"]);
    ok(d, &[
        "classify", "--manifest", "bench/manifest.jsonl", "--model", "model.json",
        "--out", "forced.csv", "--force-w-opt", "0",
    ]);
    ok(d, &[
        "classify", "--manifest", "bench/manifest.jsonl", "--model", "model.json",
        "--out", "sas.csv", "--mode", "sas-only",
    ]);
    let forced = fs::read_to_string(d.join("forced.csv")).unwrap();
    assert_eq!(forced.lines().count(), 25);
    assert_eq!(forced, fs::read_to_string(d.join("sas.csv")).unwrap());
}

#[test]
fn transform_writes_a_ternary_map() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_benchmark(d, "bench");
    ok(d, &["transform", "--pair", "bench/manifest.jsonl", "--row", "1", "--out", "maps.pgm"]);
    let bytes = fs::read(d.join("maps.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5"));
    let pixels = &bytes[bytes.len() - 96 * 96..];
    assert!(pixels.iter().all(|&v| v == 0 || v == 128 || v == 255));
    assert!(pixels.contains(&255) && pixels.contains(&0));
}

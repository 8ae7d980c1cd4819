use std::path::Path;
use std::process::{Command, Output};

fn hsk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsk"))
        .current_dir(dir)
        .args(args)
        .env_remove("HSK_THREADS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = hsk(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn pipeline_stages_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--rows", "16", "--cols", "16", "--bands", "4", "--seed", "2", "--cube", "c.hsc", "--labels", "l.hsl"]);
    ok(d, &["segment", "--cube", "c.hsc", "--alphas", "2^-2..2^6", "--out", "h"]);
    ok(d, &["sequences", "--cube", "c.hsc", "--hierarchy", "h", "--labels", "l.hsl", "--out", "s.hsq"]);
    ok(d, &["split", "--sequences", "s.hsq", "--n", "5", "--seed", "1", "--train", "tr.hsq", "--test", "te.hsq"]);
    ok(d, &["gram", "--sequences", "tr.hsq", "--gamma", "0.25", "--weighting", "decay=0.5", "--out", "k.hsg"]);
    ok(d, &["gram", "--sequences", "te.hsq", "--columns", "tr.hsq", "--gamma", "0.25", "--weighting", "decay=0.5", "--out", "kt.hsr"]);
    ok(d, &["train", "--gram", "k.hsg", "--labels-from-sequences", "tr.hsq", "--C", "4", "--out", "m.json"]);
    ok(d, &["predict", "--model", "m.json", "--gram", "kt.hsr", "--out", "p.csv"]);
    let scored = ok(d, &["score", "--predictions", "p.csv", "--sequences", "te.hsq", "--out", "score.csv"]);
    assert!(String::from_utf8_lossy(&scored.stdout).starts_with("OA "));
    let predictions = std::fs::read_to_string(d.join("p.csv")).unwrap();
    assert!(predictions.starts_with("sample_id,predicted_class\n"));
    let test = hsk::datamodel::read_sequences(d.join("te.hsq")).unwrap();
    assert_eq!(predictions.lines().count(), test.len() + 1);

    ok(d, &["cv", "--sequences", "tr.hsq", "--gammas", "2^-3..2^0", "--cs", "1,8", "--weightings", "const,q=1", "--folds", "3", "--out", "cv.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("cv.csv")).unwrap().lines().count(), 1 + 4 * 2 * 2);
    ok(d, &[
        "evaluate", "--cube", "c.hsc", "--hierarchy", "h", "--labels", "l.hsl", "--n", "5",
        "--repetitions", "2", "--methods", "pixel,spectrum-c", "--gammas", "0.25", "--cs", "4",
        "--folds", "3", "--results", "r.csv", "--summary", "sum.csv",
    ]);
    let results = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(results.starts_with("method,n,repetition,OA,AA,kappa,gamma,C,weighting"));
    assert_eq!(results.lines().count(), 1 + 2 * 2);
}

#[test]
fn oversized_q_warns_and_yields_zeros() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--rows", "12", "--cols", "12", "--bands", "3", "--cube", "c.hsc", "--labels", "l.hsl"]);
    ok(d, &["segment", "--cube", "c.hsc", "--out", "h"]);
    ok(d, &["sequences", "--cube", "c.hsc", "--hierarchy", "h", "--labels", "l.hsl", "--out", "s.hsq"]);
    let out = ok(d, &["gram", "--sequences", "s.hsq", "--gamma", "1", "--weighting", "q=99", "--out", "k.hsg"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("WARN") && stderr.contains("99"), "{stderr}");
    let k = hsk::datamodel::read_gram(d.join("k.hsg")).unwrap();
    assert!(k.entries().iter().all(|&v| v == 0.0));
}

#[test]
fn failures_are_single_line_with_code() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = hsk(d, &["segment", "--cube", "nowhere.hsc", "--out", "h"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("error[io]:") && stderr.contains("nowhere.hsc"), "{stderr}");

    ok(d, &["synth", "--rows", "8", "--cols", "8", "--cube", "c.hsc", "--labels", "l.hsl"]);
    let out = hsk(d, &["segment", "--cube", "c.hsc", "--alphas", "4,2", "--out", "h"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-input]:"));
    assert!(!d.join("h").exists());

    let out = hsk(d, &["synth", "--classes", "1", "--cube", "x.hsc", "--labels", "x.hsl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("x.hsc").exists());
}

#[test]
fn thread_count_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = Command::new(env!("CARGO_BIN_EXE_hsk"))
        .current_dir(d)
        .args(["synth", "--rows", "8", "--cols", "8", "--cube", "c.hsc", "--labels", "l.hsl"])
        .env("HSK_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let help = ok(d, &["gram", "--help"]);
    assert!(String::from_utf8_lossy(&help.stdout).contains("HSK_THREADS"));
}

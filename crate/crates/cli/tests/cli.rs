//! End-to-end tests against the compiled binary: pinned values, exit codes,
//! seeded determinism, and the artifact round trip through `verify --check`.

use std::io::Write;
use std::process::{Command, Output};

fn bellfrag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellfrag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn bell_pinned_example() {
    let out = bellfrag(&["bell", "--n", "4", "--k", "2", "--weights", "lah"]);
    assert_eq!(stdout_of(&out).trim(), "36");
}

#[test]
fn bell_full_column_and_csv_header() {
    let out = stdout_of(&bellfrag(&["bell", "--n", "4", "--weights", "cycles"]));
    assert!(out.contains("B(4,1) = 6"));
    assert!(out.contains("B(4,4) = 1"));
    let csv = stdout_of(&bellfrag(&[
        "bell", "--n", "4", "--weights", "cycles", "--format", "csv",
    ]));
    assert_eq!(csv.lines().next(), Some("n,k,value"));
    assert!(csv.lines().any(|l| l == "4,2,11"));
}

#[test]
fn weight_file_of_rationals() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("w.txt");
    let mut f = std::fs::File::create(&path).expect("create");
    writeln!(f, "# factorial reciprocals").expect("write");
    writeln!(f, "1\n1/2\n1/6").expect("write");
    let out = stdout_of(&bellfrag(&[
        "bell",
        "--n",
        "3",
        "--k",
        "2",
        "--weights",
        path.to_str().expect("utf-8 path"),
    ]));
    assert_eq!(out.trim(), "3/2");
}

#[test]
fn unknown_family_and_bad_file_are_usage_errors() {
    let out = bellfrag(&["bell", "--n", "3", "--k", "1", "--weights", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown weight family"));

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("w.txt");
    std::fs::write(&path, "1\nbogus\n").expect("write");
    let out = bellfrag(&[
        "bell",
        "--n",
        "2",
        "--k",
        "1",
        "--weights",
        path.to_str().expect("utf-8 path"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn existence_scan_reports_first_failure() {
    let out = stdout_of(&bellfrag(&[
        "existence",
        "--weights",
        "uniform",
        "--scan-to",
        "20",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).expect("json artifact");
    assert_eq!(v["result"]["first_failing_n"], 20);
    assert_eq!(v["result"]["report"]["verdict"], "infeasible");
    let cert = &v["result"]["report"]["certificate"];
    assert_eq!(cert["k"], 2);
    assert!(cert["coarse_set"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn kingman_first_split_prints_exact_law() {
    let out = stdout_of(&bellfrag(&["kingman", "--n", "4", "--first-split"]));
    assert!(out.starts_with("{0.369188, 0.261624, 0.369188}"));
    assert!(out.contains("1/2 + 1*ln(2) - 3/4*ln(3)"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "fragment", "--n", "6", "--weights", "cycles", "--seed", "42", "--samples", "3",
        "--format", "json",
    ];
    let a = stdout_of(&bellfrag(&args));
    let b = stdout_of(&bellfrag(&args));
    assert_eq!(a, b);
    let mut other = args;
    other[6] = "43";
    let c = stdout_of(&bellfrag(&other));
    assert_ne!(a, c);
}

#[test]
fn artifact_round_trip_through_verify_check() {
    let dir = tempfile::tempdir().expect("tempdir");
    let art = dir.path().join("gibbs.json");
    let art_str = art.to_str().expect("utf-8 path");
    let out = bellfrag(&[
        "gibbs", "--n", "5", "--k", "3", "--weights", "trees", "--format", "json", "--out",
        art_str,
    ]);
    assert!(out.status.success());
    let check = bellfrag(&["verify", "--check", art_str]);
    assert_eq!(check.status.code(), Some(0), "fresh artifact must reproduce");

    let original = std::fs::read_to_string(&art).expect("read artifact");
    let tampered = original.replace("\"n\": 5", "\"n\": 6");
    assert_ne!(original, tampered, "tamper target must exist");
    std::fs::write(&art, tampered).expect("write tampered");
    let check = bellfrag(&["verify", "--check", art_str]);
    assert_eq!(check.status.code(), Some(3), "tampered artifact must fail");
}

#[test]
fn verify_runs_a_named_suite() {
    let out = bellfrag(&["verify", "non-product-weights"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("non-product-weights: PASS"));

    let out = bellfrag(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coalesce_rejects_nonpositive_kernel() {
    let out = bellfrag(&["coalesce", "--n", "8", "--b", "-1", "--c", "2", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive"));
}

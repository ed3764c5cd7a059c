use std::path::Path;
use std::process::{Command, Output};

fn sumprod(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumprod"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SUMPROD_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn prove_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = sumprod(&["prove", "H(A,B) <= H(A) + H(B) where A, B"], dir.path());
    assert_eq!(code(&ok), 0);
    let v = json(&ok);
    assert_eq!(v["status"], "proved");
    assert_eq!(v["verified"], true);
    assert!(v["forward"]["certificate"].as_array().is_some_and(|c| !c.is_empty()));

    let nsp = sumprod(&["prove", "H(A) <= 0 where A"], dir.path());
    assert_eq!(code(&nsp), 2);
    assert_eq!(json(&nsp)["status"], "not-shannon-provable");

    let bad = sumprod(&["prove", "H(A+B <= H(A) where A, B"], dir.path());
    assert_eq!(code(&bad), 1);
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("offset") && err.contains('^'), "{err}");

    assert_eq!(code(&sumprod(&["prove", "--suite", "nonsense"], dir.path())), 1);
    assert_eq!(code(&sumprod(&["prove"], dir.path())), 1);
    assert_eq!(code(&sumprod(&["no-such-command"], dir.path())), 1);
}

#[test]
fn prove_from_file_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.txt"), "H(A+B) <= H(A,B) where A, B\n").unwrap();
    let o = sumprod(&["prove", "--file", "s.txt", "--out", "cert.json"], dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "proved");
}

#[test]
fn falsify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let planted = "H(A+B) <= H(A) where A,B iid";
    let found = sumprod(&["falsify", planted, "--trials", "1000", "--fields", "5", "--seed", "1"], dir.path());
    assert_eq!(code(&found), 3);
    let v = json(&found);
    assert_eq!(v["field"], 5);
    assert!(v["slack"].as_f64().unwrap() < 0.0);
    assert!(v["atoms"].as_array().is_some_and(|a| !a.is_empty()));

    let none = sumprod(&["falsify", planted, "--trials", "0"], dir.path());
    assert_eq!(code(&none), 0);
    assert_eq!(stdout(&none).trim(), "none");

    let true_one = sumprod(&["falsify", "H(A+B) <= H(A) + H(B) where A, B indep", "--trials", "500"], dir.path());
    assert_eq!(code(&true_one), 0);
}

#[test]
fn entropy_reads_counterexample_files() {
    let dir = tempfile::tempdir().unwrap();
    let joint = r#"{"field": 5, "variables": ["A", "B"], "atoms": [[[1, 1], "1/4"], [[1, 2], "1/4"], [[2, 1], "1/4"], [[2, 2], "1/4"]]}"#;
    std::fs::write(dir.path().join("j.json"), joint).unwrap();
    let o = sumprod(
        &["entropy", "--joint", "j.json", "A", "A,B", "A+B", "--statement", "H(A+B) <= H(A) where A, B"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let bits: Vec<f64> = v["entropies"].as_array().unwrap().iter().map(|e| e["bits"].as_f64().unwrap()).collect();
    assert!((bits[0] - 1.0).abs() < 1e-12 && (bits[1] - 2.0).abs() < 1e-12 && (bits[2] - 1.5).abs() < 1e-12);
    assert_eq!(v["statement"]["violated"], true);
}

#[test]
fn setgen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = sumprod(&["setgen", "digit", "--sigma", "0.5", "--n", "12", "--out", "a.json"], dir.path());
    assert_eq!(code(&o), 0);
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(file["cells"].as_array().unwrap().len(), 64);
    assert_eq!(file["n"], 12);

    let apgp = sumprod(&["setgen", "apgp", "--t", "0.75", "--n", "16", "--seed", "3"], dir.path());
    assert_eq!(code(&apgp), 0);
    assert_eq!(json(&apgp)["sigma_report"]["pass"], true);

    assert_eq!(code(&sumprod(&["setgen", "bogus", "--n", "8"], dir.path())), 1);
    assert_eq!(code(&sumprod(&["setgen", "digit", "--n", "8"], dir.path())), 1);

    let rle = sumprod(&["setgen", "full", "--n", "10", "--rle"], dir.path());
    assert_eq!(json(&rle)["set"]["runs"], serde_json::json!([[0, 1024]]));
}

#[test]
fn slope_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    sumprod(&["setgen", "full", "--n", "8", "--out", "full.json"], p);
    let o = sumprod(&["slope", "--set", "full.json", "--variant", "2"], p);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["implied_log_k"].as_f64().unwrap() <= 6.0);

    std::fs::write(p.join("one.json"), r#"{"n": 8, "lo": 1.0, "hi": 2.0, "cells": [17]}"#).unwrap();
    let single = sumprod(&["slope", "--set", "one.json"], p);
    assert_eq!(code(&single), 0);
    assert!(json(&single)["implied_log_k"].as_f64().unwrap() <= 0.0);

    sumprod(&["setgen", "digit", "--sigma", "0.5", "--n", "10", "--out", "half.json"], p);
    assert_eq!(code(&sumprod(&["slope", "--set", "half.json", "--variant", "3"], p)), 1);
}

#[test]
fn sumproduct_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = sumprod(&["sumproduct", "--family", "digit", "--sigma", "0.5", "--scales", "8..14", "--c", "0.05", "--out", "run"], p);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(p.join("run/report.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| &r[col("theorem_b_pass")] == "true"));
    assert!(rows.iter().all(|r| r[col("c_hat")].parse::<f64>().unwrap() > 0.0));

    let table = sumprod(&["report", "run"], p);
    assert_eq!(code(&table), 0);
    assert!(stdout(&table).contains("report.csv") && stdout(&table).contains("ok"));
    let summary = sumprod(&["report", "run", "--format", "json"], p);
    assert_eq!(json(&summary)["all_ok"], true);

    std::fs::write(p.join("run/report.csv"), "tampered").unwrap();
    assert_eq!(code(&sumprod(&["report", "run"], p)), 1);
    std::fs::create_dir(p.join("empty")).unwrap();
    assert_eq!(code(&sumprod(&["report", "empty"], p)), 1);
}

#[test]
fn sumproduct_upper_bound_and_degenerate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = sumprod(&["sumproduct", "--family", "apgp", "--t", "0.75", "--seed", "3", "--scales", "16", "--c", "0.6", "--out", "ap"], p);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(p.join("ap/report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,false"), "{csv}");

    std::fs::write(p.join("one.json"), r#"{"n": 8, "lo": 1.0, "hi": 2.0, "cells": [3]}"#).unwrap();
    let one = sumprod(&["sumproduct", "--set", "one.json", "--out", "one"], p);
    assert_eq!(code(&one), 0);
    assert!(stdout(&one).contains("degenerate"));
}

#[test]
fn output_root_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), r#"{"sumproduct": {"family": "full", "scales": "8", "c": 0.6}}"#).unwrap();
    let run = |extra: &[&str], out: &str| {
        let mut args = vec!["--config", "cfg.json", "sumproduct", "--out", out];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_sumprod"))
            .args(&args)
            .current_dir(p)
            .env("SUMPROD_OUTPUT_ROOT", p.join("root"))
            .output()
            .unwrap()
    };
    assert!(run(&[], "from-config").status.success());
    let csv = std::fs::read_to_string(p.join("root/from-config/report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,false"));
    assert!(run(&["--c", "0.01"], "flag-wins").status.success());
    let csv = std::fs::read_to_string(p.join("root/flag-wins/report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",true,false"));

    std::fs::write(p.join("cfg.json"), r#"{"sumproduct": {"colour": 1}}"#).unwrap();
    assert!(!run(&[], "bad").status.success());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (threads, out) in [("1", "one"), ("4", "four")] {
        let o = sumprod(
            &["--threads", threads, "sumproduct", "--family", "cantor", "--scales", "8,10,12", "--slope", "--out", out],
            p,
        );
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        std::fs::read(p.join("one/report.csv")).unwrap(),
        std::fs::read(p.join("four/report.csv")).unwrap()
    );
}

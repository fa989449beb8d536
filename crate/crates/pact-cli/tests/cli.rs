use std::process::{Command, Output};

use serde_json::Value;

fn pact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pact")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn theory_root_cluster_table() {
    let out = pact(&["theory", "--alpha", "1", "--p", "0.8", "--root-cluster", "--kmax", "6"]);
    assert!(out.status.success());
    let v = json(&out);
    let moments = v["root_cluster"]["moments"].as_array().unwrap();
    assert_eq!(moments.len(), 6);
    let table = pact_core::moments::closed_form_alpha1(0.8, 6).unwrap();
    for (k, m) in moments.iter().enumerate() {
        let want = table.moment(k + 1);
        assert!((m.as_f64().unwrap() - want).abs() <= 1e-9 * want, "moment {}", k + 1);
    }
    assert_eq!(v["root_cluster"]["scaling"]["exponent"], 0.9);
}

#[test]
fn theory_global_predictions() {
    let out = pact(&["theory", "--alpha", "0", "--p", "0.9", "--stats", "vertices,fringe:R(B,B)"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["regime"]["regime"], "supercritical");
    assert_eq!(v["predictions"][0]["limit_vector"][0], 0.5);
    assert_eq!(v["predictions"][1]["entries"][0], "R(B,B)");
}

#[test]
fn simulate_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = pact(&[
            "simulate", "--dary", "2", "--p", "0.7", "--n", "2000", "--reps", "50", "--stats", "rootcluster", "--seed", "7", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["seed"], 7);
    assert_eq!(v["meta"]["model"]["dary"], 2);
    assert_eq!(v["meta"]["n"], 2000);
    assert_eq!(v["meta"]["reps"], 50);
    let r = &v["results"][0];
    assert_eq!(r["statistic"], "root_cluster");
    for key in ["mean", "cov", "scaled", "prediction", "verdict"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    for key in ["exponent", "mean", "cov", "m3", "m4"] {
        assert!(r["scaled"].get(key).is_some(), "missing scaled.{key}");
    }
}

#[test]
fn simulate_csv() {
    let out = pact(&["simulate", "--alpha", "0", "--p", "0.6", "--n", "300", "--reps", "20", "--stats", "vertices", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,empirical,predicted,rel_err,verdict"));
    assert!(lines.next().unwrap().starts_with("vertices/mean/red_vertices,"));
}

#[test]
fn oracle_methods_agree() {
    let exact = json(&pact(&["oracle", "--alpha", "0", "--p", "0.35", "--n", "6"]));
    let listed = json(&pact(&["oracle", "--alpha", "0", "--p", "0.35", "--n", "6", "--method", "enumerate"]));
    let closed = json(&pact(&["oracle", "--alpha", "0", "--p", "0.35", "--n", "6", "--method", "closed-form"]));
    for k in 1..=6 {
        let e = exact["pmf"][k].as_f64().unwrap();
        assert!((e - listed["pmf"][k].as_f64().unwrap()).abs() < 1e-12);
        assert!((e - closed["pmf"][k].as_f64().unwrap()).abs() < 1e-12);
    }
    let three = json(&pact(&["oracle", "--alpha", "0", "--p", "0.35", "--n", "3"]));
    assert!((three["pmf"][2].as_f64().unwrap() - 1.5 * 0.35 * 0.65).abs() < 1e-15);
    let series = json(&pact(&["oracle", "--dary", "2", "--p", "0.5", "--n", "4", "--method", "series"]));
    assert!((series["falling_moments"][4].as_f64().unwrap() - 25.0 / 12.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &[],
        &["simulate", "--alpha", "0", "--dary", "2", "--p", "0.5", "--n", "10"],
        &["simulate", "--p", "0.5", "--n", "10"],
        &["simulate", "--alpha", "0", "--p", "1.5", "--n", "10"],
        &["simulate", "--alpha", "0", "--p", "0.5", "--n", "10", "--format", "xml"],
        &["simulate", "--alpha", "0", "--p", "0.5", "--n", "10", "--stats", "degrees"],
        &["oracle", "--dary", "2", "--p", "0.5", "--n", "5", "--method", "closed-form"],
        &["verify", "--suite", "nightly"],
    ];
    for args in cases {
        assert_eq!(pact(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(pact(&["--help"]).status.code(), Some(0));
}

#[test]
fn quick_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.csv");
    let out = pact(&["verify", "--suite", "quick", "--seed", "42", "--format", "csv", "--out", path.to_str().unwrap()]);
    let log = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{log}");
    assert_eq!(log.lines().filter(|l| l.starts_with("PASS")).count(), 12);
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("name,empirical,predicted,rel_err,verdict"));
}

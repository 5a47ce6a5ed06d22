use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn groupbh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupbh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn adaptive_flat_reports_constant_weight() {
    let dir = tempfile::tempdir().unwrap();
    let mut p: Vec<String> = (0..19)
        .map(|k| format!("{}", 0.001 + 0.02 * k as f64))
        .collect();
    p.extend((0..6).map(|k| format!("{}", 0.6 + 0.05 * k as f64)));
    let pv = write(dir.path(), "p.txt", &p.join("\n"));
    let out = groupbh(&["test", "--method", "adaptive-bh", "--pvalues", &pv]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let weights: Vec<&str> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(weights.len(), 25);
    assert!(weights.iter().all(|&w| w == "0.56"), "{weights:?}");
    assert_eq!(header_value(&text, "lambda"), Some("0.5"));
}

#[test]
fn empty_rejection_is_success() {
    let dir = tempfile::tempdir().unwrap();
    let pv = write(dir.path(), "p.txt", "0.9\n0.8\n0.7\n");
    let res = dir.path().join("res.csv");
    let out = groupbh(&["test", "--pvalues", &pv, "--out", res.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(res).unwrap();
    assert_eq!(header_value(&text, "rejections"), Some("0"));
}

#[test]
fn size_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p: Vec<String> = (0..99).map(|_| "0.5".to_string()).collect();
    let pv = write(dir.path(), "p.txt", &p.join("\n"));
    let spec = write(dir.path(), "s.json", r#"{"n":100,"trees":[{"levels":[]}]}"#);
    let out = groupbh(&["test", "--pvalues", &pv, "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let pv = write(dir.path(), "p.txt", "0.1\n1.2\n");
    assert_eq!(groupbh(&["test", "--pvalues", &pv]).status.code(), Some(2));
    let pv = write(dir.path(), "q.txt", "0.1\n0.2\n");
    let out = groupbh(&["test", "--pvalues", &pv, "--method", "heir-gbh"]);
    assert_eq!(out.status.code(), Some(2), "oracle method without truth");
    assert_eq!(
        groupbh(&["test", "--pvalues", &pv, "--method", "holm"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(groupbh(&["frobnicate"]).status.code(), Some(2));
    let spec = write(
        dir.path(),
        "bad.json",
        r#"{"n":2,"trees":[{"levels":[[{"path":[1],"members":[0]}]]}]}"#,
    );
    assert_eq!(
        groupbh(&["test", "--pvalues", &pv, "--spec", &spec])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_hierarchical_run_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "s.json",
        r#"{"n":10,"trees":[{"levels":[[{"path":[1],"members":[[0,4]]},{"path":[2],"members":[[4,10]]}]]}]}"#,
    );
    let pv = write(
        dir.path(),
        "p.txt",
        "0.2\n0.3\n0.001\n0.002\n0.5\n0.6\n0.7\n0.8\n0.004\n0.04\n",
    );
    let truth = write(dir.path(), "t.txt", "1\n1\n0\n0\n1\n1\n1\n1\n0\n0\n");
    let out = groupbh(&[
        "test",
        "--method",
        "heir-gbh",
        "--pvalues",
        &pv,
        "--spec",
        &spec,
        "--truth",
        &truth,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let w: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((w[0] - 0.4).abs() < 1e-12 && (w[9] - 0.8).abs() < 1e-12);
    assert_eq!(header_value(&text, "fdp"), Some("0"));
    // 0.8 * 0.04 = 0.032 exceeds 4 * 0.05 / 10
    assert_eq!(header_value(&text, "rejections"), Some("3"));
}

#[test]
fn simulate_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let out = groupbh(&[
            "simulate",
            "--replicates",
            "3",
            "--grid",
            "3",
            "--seed",
            "11",
            "--rho-l1",
            "0.3",
            "--rho-l2",
            "0.4",
            "--out",
            f.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 * 5);
    assert!(lines[1].contains(",0.3,0.4,0.5,0.05,11"), "{}", lines[1]);
}

#[test]
fn simulate_rejects_bad_plan() {
    let out = groupbh(&["simulate", "--replicates", "1", "--rho-l1", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_and_corruption_fails() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.jsonl");
    let out = groupbh(&[
        "validate",
        "--trials",
        "3",
        "--ancestor-estimate",
        "lineage",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = fs::read_to_string(&rep).unwrap();
    assert_eq!(
        text.lines().count(),
        3 * groupbh::validate::SWEEP_IDENTITIES.len()
    );
    for l in text.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["pass"].as_bool().unwrap());
    }
    let out = groupbh(&[
        "validate",
        "--trials",
        "2",
        "--ancestor-estimate",
        "lineage",
        "--corrupt",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generated_layouts_load_back() {
    let dir = tempfile::tempdir().unwrap();
    for (layout, n) in [("simulation", 5000), ("eeg", 61 * 61 * 2)] {
        let f = dir.path().join(format!("{layout}.json"));
        let out = groupbh(&[
            "generate",
            "--layout",
            layout,
            "--times",
            "2",
            "--out",
            f.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let forest = groupbh::format::forest_from_json(&fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(forest.n(), n);
    }
}

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmm-axioms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn passing_checks_exit_zero() {
    let out = run(&[
        "check-axioms",
        "--rule",
        "wgm:0.5",
        "--trials",
        "200",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "check-axioms");
    assert!(v["spec_version"].is_string());
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports
        .iter()
        .all(|r| r["passed"] == true && r["trials"] == 200));
}

#[test]
fn token_symmetry_gates_only_on_request() {
    let args = [
        "check-axioms",
        "--rule",
        "wgm:0.3",
        "--trials",
        "100",
        "--seed",
        "7",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["symmetry_required"], false);
    let symmetry = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["axiom"] == "token_symmetry")
        .unwrap();
    assert_eq!(symmetry["passed"], false);

    let mut strict = args.to_vec();
    strict.push("--require-symmetry");
    assert_eq!(run(&strict).status.code(), Some(1));
    let half = run(&[
        "check-axioms",
        "--rule",
        "wgm:0.5",
        "--trials",
        "100",
        "--require-symmetry",
    ]);
    assert_eq!(half.status.code(), Some(0));
}

#[test]
fn failing_checks_exit_one_with_witnesses() {
    let out = run(&[
        "check-axioms",
        "--rule",
        "csum",
        "--trials",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let validity = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["axiom"] == "validity_invariance")
        .unwrap();
    assert_eq!(validity["passed"], false);
    assert_eq!(
        validity["witness"]["inputs"]["state"],
        serde_json::json!([1.0, 1.0])
    );
    assert_eq!(validity["witness"]["inputs"]["amount"], 1.0);
    assert_eq!(
        validity["witness"]["observed"]["reserves"],
        serde_json::json!([2.0, 0.0])
    );
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["check-axioms", "--rule", "wgm:0.5", "--bogus"],
        vec!["check-axioms", "--rule", "wgm:1.5"],
        vec!["check-axioms", "--rule", "nonsense"],
        vec!["classify"],
        vec!["simulate-fees", "--rule", "product", "--phi", "1.0"],
        vec!["check-axioms", "--rule", "product", "--trials", "0"],
        vec!["orbit-export", "--rule", "product", "--start", "1,x"],
    ] {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("report.json");
    let out = run(&[
        "classify",
        "--rule",
        "wgm:0.5",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["classify", "--rule", "wgm:0.3", "--seed", "4"];
    let to_stdout = run(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let to_file = run(&with_file);
    assert_eq!(to_file.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn classify_reports_weights() {
    let out = run(&["classify", "--rule", "wgm:0.8", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    assert!((v["w_hat"].as_f64().unwrap() - 0.8).abs() <= 1e-9);
    assert_eq!(v["per_orbit"].as_array().unwrap().len(), 5);

    let out = run(&["classify", "--rule", "wprod:0.5,0.3,0.2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["equal_weights"], false);
    assert_eq!(v["slices"]["pairs"].as_array().unwrap().len(), 3);

    let out = run(&["classify", "--rule", "csum", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "fail");
}

#[test]
fn simulate_fees_reports_drift() {
    let out = run(&[
        "simulate-fees",
        "--rule",
        "product",
        "--phi",
        "0.003",
        "--trades",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["strictly_increasing"], true);
    let d = &v["decomposition"];
    assert!((d["output_direct"].as_f64().unwrap() - 0.997 / 1.997).abs() <= 1e-12);
    assert_eq!(
        v["drift"]["invariant_values"].as_array().unwrap().len(),
        101
    );

    let csv = run(&[
        "simulate-fees",
        "--rule",
        "product",
        "--format",
        "csv",
        "--trades",
        "5",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("step,x,y,phi\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn orbit_export_writes_csv() {
    let out = run(&[
        "orbit-export",
        "--rule",
        "wgm:0.2",
        "--samples",
        "16",
        "--start",
        "2,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,u1,u2"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(first[..2], [2.0, 0.5]);
    assert_eq!(text.lines().count(), 18);

    let out = run(&[
        "orbit-export",
        "--rule",
        "csum",
        "--samples",
        "64",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec![
            "check-axioms",
            "--rule",
            "csum",
            "--trials",
            "100",
            "--seed",
            "7",
        ],
        vec![
            "check-axioms",
            "--rule",
            "wgm:0.3",
            "--trials",
            "300",
            "--seed",
            "2",
        ],
        vec!["classify", "--rule", "wgm:0.6", "--seed", "9"],
        vec!["classify", "--rule", "wprod:0.4,0.3,0.2,0.1", "--seed", "9"],
        vec!["simulate-fees", "--rule", "wgm:0.7", "--seed", "3"],
        vec!["orbit-export", "--rule", "product", "--seed", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

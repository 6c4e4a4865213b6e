//! End-to-end tests of the `lss` binary: exit codes, diagnostics,
//! golden values on the worked three-dimensional example, and byte-level
//! determinism of the emitted JSON/CSV.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lss"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lss-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_worked_example_exit_zero() {
    let out = run(&["analyze", fixture("sys82.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lyapunov: PASS"), "{text}");
    assert!(text.contains("matrix 0: dim V = 2"), "{text}");
    assert!(text.contains("matrix 1: dim V = 1"), "{text}");
    assert!(text.contains("matrix 2: dim V = 1"), "{text}");
    assert!(
        text.contains("condition (C): fails (component [0, 1, 2]"),
        "{text}"
    );
    assert!(
        text.contains("theorem 4: prerequisite = true, conditions = [false, false, false, false]"),
        "{text}"
    );
}

#[test]
fn analyze_single_minus_identity_all_pass() {
    let path = tmp("minus_identity.json");
    fs::write(
        &path,
        r#"{"dimension": 2, "matrices": [[[-1, 0], [0, -1]]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("matrix 0: dim V = 0, dim K = 0, hurwitz = true"), "{text}");
    assert!(text.contains("condition (C): holds"), "{text}");
}

#[test]
fn analyze_theorem7_pair_stable_any_input() {
    let out = run(&["analyze", fixture("pair7.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("conclusion: asymptotically stable for any input (Theorem 7)"),
        "{text}"
    );
}

#[test]
fn analyze_malformed_file_names_field_exit_one() {
    let path = tmp("bad_row.json");
    fs::write(
        &path,
        r#"{"dimension": 2, "matrices": [[[1, 0], [0]]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("matrices[0]"), "diagnostic must name the field: {err}");
}

#[test]
fn analyze_lyapunov_failure_exit_two() {
    let path = tmp("unstable.json");
    fs::write(&path, r#"{"dimension": 1, "matrices": [[[1]]]}"#).unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("lyapunov: FAIL (matrix 0"));
}

#[test]
fn estimate_su_worked_example_golden() {
    let out_path = tmp("su82.json");
    let out = run(&[
        "estimate-su",
        fixture("sys82.json").to_str().unwrap(),
        fixture("sig82.json").to_str().unwrap(),
        "--horizon",
        "200",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["rank"], 1);
    assert_eq!(json["converged"], true);
    let m = json["matrix"].as_array().unwrap();
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == 1 && j == 1 { 1.0 } else { 0.0 };
            assert!(
                (x.as_f64().unwrap() - expected).abs() < 1e-6,
                "S_u[{i}][{j}] = {x}"
            );
        }
    }
}

#[test]
fn estimate_su_not_converged_exit_three() {
    // Gram e^{-2e-4 t}: checkpoint residuals ~1e-4 over a short horizon,
    // far above the convergence tolerance.
    let sys = tmp("slow.json");
    fs::write(&sys, r#"{"dimension": 1, "matrices": [[[-0.0001]]]}"#).unwrap();
    let sig = tmp("slow_sig.json");
    fs::write(&sig, r#"{"type": "periodic", "pattern": [{"index": 0, "duration": 1.0}]}"#)
        .unwrap();
    let out = run(&[
        "estimate-su",
        sys.to_str().unwrap(),
        sig.to_str().unwrap(),
        "--horizon",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["converged"], false);
}

#[test]
fn simulate_worked_example_limit_gram() {
    let csv_path = tmp("traj82.csv");
    let out = run(&[
        "simulate",
        fixture("sys82.json").to_str().unwrap(),
        fixture("sig82.json").to_str().unwrap(),
        "--x0",
        "1,1,1",
        "--horizon",
        "25.132741228718345",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Gram Loewner-monotone along grid: yes"), "{text}");

    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,norm_x,gram_eig_1,gram_eig_2,gram_eig_3,active_index"
    );
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let eigs: Vec<f64> = last[2..5].iter().map(|s| s.parse().unwrap()).collect();
    // Limit Gram S_u^2 = diag(0, 1, 0): sorted eigenvalues (0, 0, 1).
    assert!(eigs[0].abs() < 1e-3 && eigs[1].abs() < 1e-3, "{eigs:?}");
    assert!((eigs[2] - 1.0).abs() < 1e-3, "{eigs:?}");
}

#[test]
fn simulate_zero_x0_and_zero_horizon() {
    let csv_path = tmp("traj0.csv");
    let out = run(&[
        "simulate",
        fixture("sys82.json").to_str().unwrap(),
        fixture("sig82.json").to_str().unwrap(),
        "--x0",
        "0,0,0",
        "--horizon",
        "0",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(&csv_path).unwrap();
    // Header plus a single grid row at t = 0 with norm 0.
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2, "{csv}");
    assert!(rows[1].starts_with("0,0,"), "{csv}");
}

#[test]
fn simulate_dimension_mismatch_exit_one() {
    let out = run(&[
        "simulate",
        fixture("sys82.json").to_str().unwrap(),
        fixture("sig82.json").to_str().unwrap(),
        "--x0",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("x0"), "{}", stderr(&out));
}

#[test]
fn check_signal_periodic_regular() {
    let out = run(&[
        "check-signal",
        fixture("sig82.json").to_str().unwrap(),
        "--horizon",
        "100",
        "--modes",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["regular"], "regular");
    assert_eq!(json["chaotic"], "non_chaotic");
    assert_eq!(json["j_estimate"], serde_json::json!([0, 1, 2]));
}

#[test]
fn check_signal_chaotic_generator() {
    let out = run(&[
        "check-signal",
        fixture("chaotic.json").to_str().unwrap(),
        "--horizon",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["chaotic"], "chaotic");
    assert_eq!(json["regular"], "not_regular");
}

#[test]
fn check_signal_short_explicit_prefix_undecidable() {
    let sig = tmp("prefix.json");
    fs::write(
        &sig,
        r#"{"type": "explicit", "times": [0.0, 1.0, 2.0, 3.0], "values": [0, 1, 0]}"#,
    )
    .unwrap();
    let out = run(&["check-signal", sig.to_str().unwrap(), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["chaotic"], "undecidable_from_prefix");
    assert_eq!(json["regular"], "undecidable_from_prefix");
}

#[test]
fn report_combined_and_su_zero_for_certified_pair() {
    let out_path = tmp("combined.json");
    let out = run(&[
        "report",
        fixture("pair7.json").to_str().unwrap(),
        fixture("chaotic.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(json["analysis"]["conclusion"]["cited"], "Theorem 7");
    // A Theorem 7 certificate forces S_u = 0 for every input.
    assert_eq!(json["su"]["rank"], 0);
    assert_eq!(json["su"]["converged"], true);
    assert_eq!(json["signal"]["chaotic"], "chaotic");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tmp("det_a.json");
    let b = tmp("det_b.json");
    for path in [&a, &b] {
        let out = run(&[
            "estimate-su",
            fixture("pair7.json").to_str().unwrap(),
            fixture("chaotic.json").to_str().unwrap(),
            "--seed",
            "123",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let ca = tmp("det_a.csv");
    let cb = tmp("det_b.csv");
    for path in [&ca, &cb] {
        let out = run(&[
            "simulate",
            fixture("pair7.json").to_str().unwrap(),
            fixture("chaotic.json").to_str().unwrap(),
            "--x0",
            "1,-1",
            "--horizon",
            "20",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    assert_eq!(fs::read(&ca).unwrap(), fs::read(&cb).unwrap());
}

#[test]
fn system_with_lyapunov_matrix_is_normalized() {
    // Congruence image of the Theorem 7 pair: B_i -> P^{-1/2} B~_i P^{1/2}
    // would need matching P; instead supply a diagonal P and matrices
    // satisfying B'P + PB <= 0 for it.
    let path = tmp("weighted.json");
    // B = diag(-1, -2) satisfies B'P + PB < 0 for P = diag(4, 1).
    fs::write(
        &path,
        r#"{"dimension": 2, "matrices": [[[-1, 0], [0, -2]]], "lyapunov": [[4, 0], [0, 1]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("hurwitz = true"));
}

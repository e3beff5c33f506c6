use std::process::Command;

fn trimlaw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trimlaw"))
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn verify_writes_artefacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = trimlaw()
        .args(["verify", "--config", &config("smoke"), "--threads", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["rows.csv", "summary.json", "spec.json", "plan.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 13);
    assert!(rows.starts_with("seed,n,S,S_trim,T_trunc,exceed_count,b_n,f_n,flag,"));
}

#[test]
fn simulate_matches_verify_rows() {
    let dir = tempfile::tempdir().unwrap();
    trimlaw().args(["verify", "--config", &config("smoke"), "--out"]).arg(dir.path()).output().unwrap();
    let out = trimlaw().args(["simulate", "--config", &config("smoke")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(dir.path().join("rows.csv")).unwrap());
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name":"x","map":"doubling"}"#).unwrap();
    let out = trimlaw().args(["verify", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = trimlaw().args(["verify", "--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = trimlaw().args(["ulam", "--map", "tent"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trim_plan_csv() {
    let out = trimlaw().args(["trim-plan", "--config", &config("trimmed_slln")]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,f_n,a_n,b_n,d_n,gamma_n,cond_ratio_a,cond_ratio_regvar,cond_ratio_bn");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "10000");
    assert_eq!(first[3], "85");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn ulam_report_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    let r = dir.path().join("r.json");
    let out = trimlaw()
        .args(["ulam", "--map", "doubling", "--bins", "8", "--method", "analytic", "--matrix"])
        .arg(&m)
        .arg("--report")
        .arg(&r)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let matrix = std::fs::read_to_string(&m).unwrap();
    assert_eq!(matrix.lines().count(), 8);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert_eq!(rep["leadingEigenvalue"], 1.0);
    assert_eq!(rep["secondModulus"], 0.0);

    let out = trimlaw().args(["ulam", "--map", "gauss", "--bins", "32", "--method", "mc", "--samples", "200000"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((rep["leadingEigenvalue"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn lambda_curve_csv() {
    let out = trimlaw()
        .args(["lambda-curve", "--phi", "coin", "--bins", "16", "--t-min", "-1", "--t-max", "1", "--t-steps", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (t, l) in rows {
        assert!((l - (t / 2.0).cosh()).abs() < 1e-9);
    }
    let out = trimlaw().args(["lambda-curve", "--t-steps", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

use std::path::Path;
use std::process::{Command, Output};

fn singbern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singbern"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn psi_prints_coefficients() {
    let out = singbern(&["psi", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "a: 10 -15 6\n");
    let out = singbern(&["psi", "--r", "2"]);
    assert_eq!(stdout(&out), "a: 126 -420 540 -315 70\n");
}

#[test]
fn scheme_prints_ladder() {
    let out = singbern(&["scheme", "--n", "8", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n_i: 8 16\nC_i: -1 2\n");
    let out = singbern(&["scheme", "--n", "8", "--r", "2", "--ladder", "arithmetic"]);
    assert_eq!(stdout(&out), "n_i: 8 16\nC_i: -1 2\n");
    let out = singbern(&["scheme", "--n", "8", "--r", "3", "--ladder", "arithmetic"]);
    assert_eq!(stdout(&out), "n_i: 8 16 24\nC_i: 0.5 -4 4.5\n");
}

#[test]
fn usage_and_config_errors_exit_one() {
    let out = singbern(&["run", "--config", "definitely-missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("definitely-missing.json"));
    assert_eq!(singbern(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(singbern(&["psi", "--r", "1", "--bogus"]).status.code(), Some(1));
    assert_eq!(singbern(&["psi", "--r", "9"]).status.code(), Some(1));
    assert_eq!(singbern(&["scheme", "--n", "1", "--r", "2"]).status.code(), Some(1));
    assert_eq!(singbern(&["scheme", "--n", "8", "--r", "2", "--ladder", "x"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(dir.path(), "typo.json", r#"{"experiment": "psi", "rr": 2}"#);
    let out = singbern(&["run", "--config", &typo]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rr"));
}

#[test]
fn help_exits_zero() {
    let out = singbern(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("corpus"));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Derivative form is selected (min beta < 1/2) but metadata stops at order 4.
    let cfg = write_config(
        dir.path(),
        "ineq.json",
        r#"{"experiment": "bernstein_ineq", "r": 5, "beta0": 0.25, "beta1": 0.25, "n_list": [256]}"#,
    );
    let out = singbern(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corpus_list_names_builtins() {
    let out = singbern(&["corpus", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["abspow", "signpow", "sin", "poly3", "constant"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "direct.json",
        r#"{"experiment": "direct", "function": "sin", "n_list": [64, 128, 256], "x_grid": 501}"#,
    );
    let csv_path = dir.path().join("out.csv");
    let out = singbern(&["run", "--config", &cfg, "--out", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "key,measured,reference,ratio");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("6.4000000000000000e1,"));

    let out = singbern(&["run", "--config", &cfg, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["metadata"]["config"]["function"], "sin");
    assert!(v["fit"]["slope"].as_f64().unwrap() < -0.9);
}

#[test]
fn psi_and_scheme_reports_via_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.json");
    let out = singbern(&["psi", "--r", "3", "--out", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
}

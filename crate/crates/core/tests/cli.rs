use std::path::Path;
use std::process::{Command, Output};

fn wavekac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavekac")).args(args).output().expect("spawn wavekac")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const STRING_CFG: &str = r#"{
  "problem": { "kind": "string", "length": 1.0, "density": { "n_grid": 400, "a": 1.0, "b": 0.8 } },
  "K": 16, "M": 1,
  "pipeline": { "dt": 0.05, "t_max": 1.4 }
}"#;

#[test]
fn forward_constant_string() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "problem": { "kind": "string", "length": 1.0, "density": { "n_grid": 2000, "a": 1.0, "b": 0.0 } }, "K": 5 }"#,
    );
    let out = wavekac(&["forward", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sd: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectral_data.json")).unwrap()).unwrap();
    let l1 = sd["lambda"][0].as_f64().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((l1 - pi2).abs() / pi2 < 1e-5, "λ1 = {l1}");
    assert!(dir.path().join("ground_truth.json").exists());
}

#[test]
fn unknown_config_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "K": 10, "bogus_key": 1 }"#);
    let out = wavekac(&["forward", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus_key"), "{err}");
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"]["exit_code"], 2);
}

#[test]
fn missing_problem_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavekac(&["forward", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = write_config(d.path(), STRING_CFG);
        let o = d.path().to_str().unwrap();
        assert_eq!(wavekac(&["forward", "--config", &cfg, "--out", o]).status.code(), Some(0));
        let r = wavekac(&["reconstruct", "--config", &cfg, "--out", o]);
        assert!(matches!(r.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["spectral_data.json", "ground_truth.json", "report.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn short_horizon_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &STRING_CFG.replace("\"t_max\": 1.4", "\"t_max\": 0.2"));
    let o = dir.path().to_str().unwrap();
    assert_eq!(wavekac(&["forward", "--config", &cfg, "--out", o]).status.code(), Some(0));
    let r = wavekac(&["reconstruct", "--config", &cfg, "--out", o]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stdout).contains("nest did not saturate"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn oracle_mode_writes_distances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STRING_CFG);
    let o = dir.path().to_str().unwrap();
    assert_eq!(wavekac(&["forward", "--config", &cfg, "--out", o]).status.code(), Some(0));
    let r = wavekac(&["reconstruct", "--config", &cfg, "--out", o, "--oracle-atoms"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(dir.path().join("distances.csv")).unwrap();
    assert!(csv.lines().count() > 2);
}

#[test]
fn verify_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let r = wavekac(&["verify", "--only", "string-identity", "--out", o]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("[PASS]")));
    assert!(dir.path().join("verify_report.json").exists());
    let bad = wavekac(&["verify", "--only", "nope", "--out", o]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn probe_krein_reports_separation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "problem": { "kind": "string", "length": 1.0, "density": { "n_grid": 800, "a": 1.0, "b": 0.8 } } }"#,
    );
    let r = wavekac(&["probe-krein", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("krein_report.json")).unwrap()).unwrap();
    assert!(v["separation"].as_f64().unwrap() > 0.0);
}

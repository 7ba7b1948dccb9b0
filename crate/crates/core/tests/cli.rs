use std::process::{Command, Output};

fn pinch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinch-ee"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("c.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_prints_outcome_json() {
    let out = pinch(&["run", "--seed", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["ee"].as_f64().unwrap() > 0.0);
    assert_eq!(v["rates"].as_array().unwrap().len(), 4);

    let out = pinch(&["run", "--seed", "4", "--schemes", "proposed,conventional"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["proposed"]["ee"].as_f64().unwrap() > 0.0);
    assert_eq!(v["conventional"]["n_active"], 0);
}

#[test]
fn sweep_writes_requested_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "sweep_variable = \"Pact_dBm\"\nsweep_values = [1, 13]\ntrials = 2\nL = 6\n",
    );
    let out_path = dir.path().join("r.json");
    let out = pinch(&[
        "sweep",
        "--config",
        &cfg,
        "--format",
        "json",
        "--schemes",
        "proposed,nearest",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2 * 2 * 2);

    let out = pinch(&["sweep", "--config", &cfg, "--trials", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(&dir, "bogus = 1\n");
    assert_eq!(pinch(&["run", "--config", &bad_key]).status.code(), Some(1));

    let bad_value = write_config(&dir, "K = 0\n");
    assert_eq!(pinch(&["run", "--config", &bad_value]).status.code(), Some(1));

    assert_eq!(pinch(&["sweep"]).status.code(), Some(1), "sweep without sweep_variable");
    assert_eq!(pinch(&["run", "--format", "xml"]).status.code(), Some(1));

    let missing = dir.path().join("nope.toml");
    assert_eq!(
        pinch(&["run", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        pinch(&["convergence", "--out", unwritable.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quick_validate_passes() {
    let out = pinch(&["validate", "--quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 8, "{text}");
    assert_eq!(out.status.code(), Some(0));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lattigauss"));
    c.env_remove("LATTIGAUSS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn exponents_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = run(&[
        "exponents",
        "--grid",
        "1:0.1:5",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "b,E_sp,E_P_un,E_T");
    let row4 = lines.find(|l| l.starts_with("4.0,")).unwrap();
    assert_eq!(row4.split(',').nth(2).unwrap(), "0.5");
    assert!(text.starts_with("# config: {\"command\":\"exponents\""));
}

#[test]
fn usage_errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = out.to_str().unwrap();
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bounds-nn", "--output", o]).status.code(), Some(1));
    assert_eq!(
        run(&["exponents", "--grid", "1:0:2", "--output", o])
            .status
            .code(),
        Some(1)
    );
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "exponents", "colour": "red"}"#).unwrap();
    assert_eq!(
        run(&["--config", cfg.to_str().unwrap(), "--output", o])
            .status
            .code(),
        Some(1)
    );
    std::fs::write(
        &cfg,
        r#"{"command": "exponents", "parameters": {"grd": "1:1:2"}}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["--config", cfg.to_str().unwrap(), "--output", o])
            .status
            .code(),
        Some(1)
    );
    std::fs::write(&cfg, r#"{"command": "verify"}"#).unwrap();
    assert_eq!(
        run(&[
            "exponents",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            o
        ])
        .status
        .code(),
        Some(1)
    );
    assert!(!out.exists());
    let o2 = bin()
        .args(["exponents"])
        .env("LATTIGAUSS_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o2.status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_assertion_exits_two() {
    let o = run(&[
        "params",
        "--schedule",
        "single",
        "--n",
        "16",
        "--k",
        "4",
        "--p",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["mac"], Value::Bool(false));
    assert_eq!(v["assertions"][0]["passed"], Value::Bool(false));
}

#[test]
fn flags_override_config_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"command": "simulate-decode", "seed": 5, "parameters": {"lattice": "integers", "n": 1, "a": 2.0, "trials": 999, "batch": 100}}"#,
    )
    .unwrap();
    let first = dir.path().join("first.json");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        first.to_str().unwrap(),
        "simulate-decode",
        "--trials",
        "2000",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = json_file(&first);
    let config = &doc["config"];
    assert_eq!(config["seed"], 5);
    assert_eq!(config["parameters"]["trials"], 2000);
    assert_eq!(config["parameters"]["sigma_w"], 1.0);
    assert_eq!(doc["rows"][0]["trials"], 2000);

    let echoed = dir.path().join("echo.json");
    std::fs::write(&echoed, serde_json::to_vec(config).unwrap()).unwrap();
    let second = dir.path().join("second.json");
    let o = run(&[
        "--config",
        echoed.to_str().unwrap(),
        "--output",
        second.to_str().unwrap(),
        "--workers",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn schedule_reports() {
    let o = run(&["params", "--schedule", "cm"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["mac"] == Value::Bool(true)));
    assert!(rows[0].get("b_fl_3").is_some());

    let o = run(&["params", "--schedule", "pe", "--ns", "50,100"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["p"], 73);
    assert_eq!(v["rows"][1]["p"], 347);
}

#[test]
fn bounds_commands() {
    let o = run(&[
        "bounds-nn",
        "--n",
        "12",
        "--k",
        "3",
        "--p",
        "23",
        "--rho",
        "3.4641016151377544",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert!((row["epsilon"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!(row["h_upper"].as_f64().unwrap() > 0.0);

    let o = run(&[
        "bounds-flatness",
        "--n",
        "2",
        "--k",
        "1",
        "--p",
        "2",
        "--taus",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["rows"][0]["a_fl"].as_f64().unwrap() - 1.295_099_099_172_095_1).abs() < 1e-12);
}

#[test]
fn simulation_commands() {
    let o = run(&[
        "simulate-ensemble",
        "--n",
        "6",
        "--k",
        "2",
        "--p",
        "11",
        "--matrices",
        "3",
        "--trials",
        "500",
        "--batch",
        "250",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);

    let o = run(&["simulate-lg", "--trials", "4000", "--center", "-0.5,0.25"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["config"]["parameters"]["matrix"],
        serde_json::json!([[1], [1]])
    );
    assert_eq!(v["assertions"].as_array().unwrap().len(), 4);

    let o = run(&[
        "simulate-decode",
        "--n",
        "4",
        "--k",
        "2",
        "--p",
        "5",
        "--trials",
        "300",
        "--seed",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v["config"]["parameters"]["matrix"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
}

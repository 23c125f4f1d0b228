use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wiener-neumann"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn run(command: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    bin()
        .arg(command)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .unwrap()
        .code()
        .unwrap()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ibp_check_on_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ibp.json");
    assert_eq!(run("ibp-check", &config("ibp-check"), &out, &[]), 0);
    let r = read(&out);
    assert_eq!(r["format"], "wn-report/1");
    assert_eq!(r["command"], "ibp-check");
    assert_eq!(r["pass"], true);
    assert_eq!(r["config"]["domain"]["kind"], "half_space");
    let check = &r["checks"][0];
    for key in ["name", "theorem", "statistic", "threshold", "pass"] {
        assert!(!check[key].is_null(), "missing {key}");
    }
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(dir.path().join("ibp.csv").exists());
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cases = [
        "{not json",
        r#"{"schema":"wn-config/1","domain":{"kind":"half_space","a":[1.0],"r":0.0,"spectrum":[1.0]},"colour":1}"#,
        r#"{"schema":"wn-config/0","domain":{"kind":"whole_space","spectrum":[1.0]}}"#,
        r#"{"schema":"wn-config/1","domain":{"kind":"half_space","r":0.0,"spectrum":[1.0]}}"#,
        r#"{"schema":"wn-config/1","domain":{"kind":"whole_space","spectrum":[-1.0]}}"#,
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{k}.json"));
        std::fs::write(&cfg, text).unwrap();
        assert_eq!(run("ibp-check", &cfg, &out, &[]), 2, "{text}");
    }
    assert_eq!(run("ibp-check", &dir.path().join("missing.json"), &out, &[]), 2);
    assert_eq!(run("no-such-command", &config("ibp-check"), &out, &[]), 2);
    assert!(!out.exists());
}

#[test]
fn whole_space_ibp_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.json");
    std::fs::write(&cfg, r#"{"schema":"wn-config/1","domain":{"kind":"whole_space","spectrum":[1.0]}}"#).unwrap();
    assert_eq!(run("ibp-check", &cfg, &dir.path().join("r.json"), &[]), 2);
}

#[test]
fn estimates_with_zero_threshold_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.json");
    std::fs::write(
        &cfg,
        r#"{"schema":"wn-config/1","domain":{"kind":"whole_space","spectrum":[1.0]},
            "params":{"count":3,"threshold":0.0}}"#,
    )
    .unwrap();
    let out = dir.path().join("e_report.json");
    assert_eq!(run("estimates", &cfg, &out, &[]), 1);
    let r = read(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(r["checks"][0]["threshold"], 0.0);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut series = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("d{k}.json"));
        assert_eq!(run("extension-check", &config("extension-check"), &out, &[]), 0);
        let mut r = read(&out);
        r["wall_time_s"] = Value::Null;
        r["series_file"] = Value::Null;
        reports.push(r);
        series.push(std::fs::read_to_string(dir.path().join(format!("d{k}.csv"))).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(series[0], series[1]);
    let coeffs = &reports[0]["data"]["coefficients"];
    assert_eq!(coeffs["a"].as_array().unwrap().len(), 7);
    assert_eq!(coeffs["r"], 0.5);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(run("my-check", &config("my-check"), &a, &["--seed", "11"]), 0);
    assert_eq!(run("my-check", &config("my-check"), &b, &["--seed", "12"]), 0);
    let (ra, rb) = (read(&a), read(&b));
    assert_eq!(ra["config"]["seed"], 11);
    assert_eq!(rb["config"]["seed"], 12);
    assert_ne!(ra["checks"], rb["checks"]);
}

#[test]
fn every_shipped_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    // penalize and ball-demo contain checks that fail at their stated tolerance
    for (name, expected) in [
        ("solve", 0),
        ("div-check", 0),
        ("domain-norms", 0),
        ("estimates", 0),
        ("penalize", 1),
        ("ball-demo", 1),
    ] {
        let out = dir.path().join(format!("{name}.json"));
        assert_eq!(run(name, &config(name), &out, &[]), expected, "{name}");
        assert_eq!(read(&out)["command"], name);
    }
}

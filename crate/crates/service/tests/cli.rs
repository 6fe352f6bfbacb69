use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ieq");
const HEADER: &str = "org_id,V,E,T_D,sector_id,M\n";

fn ieq(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run ieq")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn score_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "good.csv",
        &format!("{HEADER}a,0.5,0.4,5,generic,1.1\nb,0.2,0.9,3,generic,1\nc,1,1,10,generic,1.3\n"),
    );
    let out = ieq(&["score", "--portfolio", &good, "--t0", "2026"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);

    let bad = write(
        dir.path(),
        "bad.csv",
        &format!("{HEADER}a,0.5,0.4,5,generic,1.1\nb,1.2,0.9,3,generic,1\nc,1,1,10,generic,1.3\n"),
    );
    let out = ieq(&["score", "--portfolio", &bad, "--t0", "2026", "--max-error-fraction", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["rejected"].as_array().unwrap().len(), 1);

    // One bad row in three exceeds the default 10% budget.
    let out = ieq(&["score", "--portfolio", &bad, "--t0", "2026"]);
    assert_eq!(out.status.code(), Some(1));

    let out = ieq(&["score", "--portfolio", &good, "--sectors", "/nonexistent/sectors.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--sectors"));
}

#[test]
fn score_matches_http_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "p.csv", &format!("{HEADER}acme,0.3,0.8,7,generic,1.2\n"));
    let out_path = dir.path().join("out.json");
    let out = ieq(&["score", "--portfolio", &csv, "--t0", "2026", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let cli_report = &v["reports"][0];

    let cfg = ieq_service::Config { t0: Some(2026.0), ..Default::default() };
    let req: ieq_service::ScoreRequest = serde_json::from_value(serde_json::json!({
        "org_id": "acme", "V": 0.3, "E": 0.8, "T_D": 7, "sector_id": "generic", "M": 1.2
    }))
    .unwrap();
    let http_report = ieq_service::api::score_request(&req, &cfg).unwrap();
    assert_eq!(cli_report, &serde_json::to_value(&http_report).unwrap());
}

#[test]
fn surface_csv() {
    let out = ieq(&["surface", "--grid", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "V,E,ieq,beta,gamma,r");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!((last[0], last[1]), (1.0, 1.0));
    assert!((last[2] - 69.0).abs() < 1e-9);
    for row in &lines[1..] {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[3] / f[4] - 2.0).abs() < 1e-12);
    }

    let dir = tempfile::tempdir().unwrap();
    let params = write(dir.path(), "params.json", r#"{"a": -1}"#);
    assert_eq!(ieq(&["surface", "--params", &params]).status.code(), Some(1));
}

#[test]
fn diagnose_signmap_contrast() {
    let out = ieq(&["diagnose", "signmap", "--model", "structural", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["diagnostic"], "sign_map");
    assert_eq!(v["result"]["fraction_negative"], 1.0);

    let v = stdout_json(&ieq(&["diagnose", "signmap", "--model", "log_additive", "--grid", "16"]));
    assert_eq!(v["result"]["fraction_zero"], 1.0);
    let v = stdout_json(&ieq(&["diagnose", "signmap", "--model", "ces", "--grid", "16"]));
    assert_eq!(v["result"]["fraction_positive"], 1.0);

    assert_eq!(ieq(&["diagnose", "signmap", "--grid", "2"]).status.code(), Some(1));
}

#[test]
fn diagnose_vuong_is_reproducible() {
    let args = ["diagnose", "vuong", "--n", "500", "--noise", "0.05", "--seed", "7"];
    let a = stdout_json(&ieq(&args));
    let b = stdout_json(&ieq(&args));
    assert_eq!(a["result"]["vuong"]["z"], b["result"]["vuong"]["z"]);
    assert!(a["result"]["vuong"]["z"].as_f64().unwrap() > 1.96);
}

#[test]
fn diagnose_sobol_and_uncertainty() {
    let v = stdout_json(&ieq(&["diagnose", "sobol", "--n", "256", "--bootstrap", "20", "--t0", "2026"]));
    assert_eq!(v["result"]["input_names"].as_array().unwrap().len(), 4);
    let v = stdout_json(&ieq(&[
        "diagnose", "uncertainty", "--V", "0.5", "--E", "0.4", "--T_D", "6", "--M", "1.1", "--n", "200",
    ]));
    assert_eq!(v["result"]["quantiles"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_persists_portfolio() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pop.jsonl");
    let out = ieq(&["simulate", "--n", "500", "--seed", "3", "--out", path.to_str().unwrap(), "--t0", "2026"]);
    assert_eq!(out.status.code(), Some(0));
    let loaded = ieq_core::portfolio::load_portfolio(&path).unwrap();
    assert_eq!(loaded.portfolio.len(), 500);

    let spec = write(dir.path(), "spec.json", r#"{"rank_correlation_target": 1.5}"#);
    let out = ieq(&["simulate", "--spec", &spec, "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

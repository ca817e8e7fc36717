use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathspace")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn metric_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.json", r#"{"kind":"step","horizon":1,"knots":[0,0.5],"values":[0,1]}"#);
    let y = write(dir.path(), "y.json", r#"{"kind":"step","horizon":1,"knots":[0,0.625],"values":[0,1]}"#);

    let u = stdout_json(&run(&["metric", "--kind", "uniform", "--x", &x, "--y", &y]));
    assert_eq!(u["value"], 1.0);
    let d = stdout_json(&run(&["metric", "--kind", "d", "--x", &x, "--y", &y]));
    assert!((d["value"].as_f64().unwrap() - 0.125).abs() <= 1e-9);
    let w = stdout_json(&run(&["metric", "--kind", "two-sided", "--x", &x, "--delta", "0.25"]));
    assert_eq!(w["value"], 0.0);

    let missing = run(&["metric", "--kind", "uniform", "--x", &x]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn prokhorov_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let mu = write(dir.path(), "mu.csv", "w,x1\n0.5,0\n0.5,1\n");
    let nu = write(dir.path(), "nu.csv", "w,x1\n0.5,0.25\n0.5,1\n");
    let v = stdout_json(&run(&["prokhorov", "--mu", &mu, "--nu", &nu]));
    assert_eq!(v["rho"], 0.25);
    assert_eq!(v["epsilon_certificate"], 0.25);
    assert!(!v["coupling"].as_array().unwrap().is_empty());
    let o = stdout_json(&run(&["prokhorov", "--mu", &mu, "--nu", &nu, "--oracle"]));
    assert_eq!(o["rho"], 0.25);
}

#[test]
fn approx_restrict_then_taper() {
    let dir = tempfile::tempdir().unwrap();
    let vals = write(dir.path(), "z.txt", "0 1 2 3 4 5 6 7 8\n");
    let v = stdout_json(&run(&["approx", "--kind", "halfline", "--level", "2", "--values", &vals, "--taper", "2"]));
    assert_eq!(v["kind"], "tapered");
    assert_eq!(v["m"], 2);

    let out = dir.path().join("pl.json");
    let vals = write(dir.path(), "pl.txt", "0,1,0,1,0");
    let status = run(&["approx", "--kind", "pl", "--level", "2", "--values", &vals, "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let p: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(p["kind"], "pl");

    let wrong = run(&["approx", "--kind", "step", "--level", "3", "--values", &vals]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["sample", "--process", "poisson", "--times", "0.5,1", "--n", "20", "--rate", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_1,t_2"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn experiment_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"target":{"kind":"deterministic","knots":[0],"values":[1.5]},"space":"C01","levels":[2,3],
            "fdd_times":[[0.3,0.7]],"replicas":50,"seed":1,"bootstrap":20,"timing":false}"#,
    );
    let out = dir.path().join("r.csv");
    let o = run(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("level,probe_set,rho_hat,rho_boot_hi,delta_m,modulus_rho,two_sided_rho,sup_rho,fit_support,millis\n"));
}

use majorana_qec::noise::{derive_event_probs, ModelKind, ModelParams};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_majorana-qec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("MAJORANA_QEC_OUT_DIR").output().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn derive_probs_passes_through() {
    let o = run(&["derive-probs", "--model", "MC", "--p2", "0.01", "--q", "0.2", "--r", "0.1"]);
    assert!(o.status.success());
    let got: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let params = ModelParams {
        p2: 0.01,
        q: 0.2,
        r: 0.1,
        ..ModelParams::new(ModelKind::MC)
    };
    let want = serde_json::to_value(derive_event_probs(&params).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn invalid_config_names_the_key() {
    let o = run(&["derive-probs", "--set", "trails=10"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["key"], "trails");
    let o = run(&["derive-probs", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["key"], "q");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "model = Qp\nmodle = MC\n").unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["key"], "modle");
}

#[test]
fn ft_check_qp_bf_passes() {
    let o = run(&["ft-check", "--model", "QpBf", "--d", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["violations"].as_array().unwrap().len(), 0);
    assert_eq!(report["ec_b_weight"], 2);
}

#[test]
fn dump_layout_shapes() {
    let o = run(&["dump-layout", "--d", "3", "--layout", "geometric"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], 3);
    assert_eq!(v["gauge_matrix"].as_array().unwrap().len(), 12);
    assert_eq!(v["stab_gauge_matrix"].as_array().unwrap().len(), 4);
    assert_eq!(v["schedule"]["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn rates_reads_device_file() {
    let dir = tempfile::tempdir().unwrap();
    let dev = dir.path().join("dev.cfg");
    std::fs::write(&dev, "temperature = 0.12\n").unwrap();
    let o = run(&["rates", "--model", "MC", "--device", dev.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["model"], "MC");
    std::fs::write(&dev, "gap = 1\n").unwrap();
    let o = run(&["rates", "--device", dev.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn sweep_bytes(dir: &Path, workers: &str, name: &str) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(name);
    let o = run(&[
        "sweep", "--model", "MC", "--p0-grid", "0.002,0.004", "--set", "tie_p2=true", "--r", "0.1",
        "--series", "q", "--series-values", "0,0.5", "--p-mst2", "1e-4", "--trials", "3000",
        "--seed", "42", "--workers", workers, "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read(out.with_extension("csv")).unwrap();
    let cfg = std::fs::read(out.with_extension("cfg")).unwrap();
    (csv, cfg)
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, cfg_a) = sweep_bytes(dir.path(), "1", "one");
    let (b, _) = sweep_bytes(dir.path(), "3", "three");
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a.clone()).unwrap().lines().count(), 5);
    // Rerunning the embedded config reproduces the CSV.
    let cfg_path = dir.path().join("again.cfg");
    let text = String::from_utf8(cfg_a).unwrap();
    assert!(text.contains("seed = 42"));
    std::fs::write(&cfg_path, text).unwrap();
    let again = dir.path().join("again");
    let o = run(&["sweep", "--config", cfg_path.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(again.with_extension("csv")).unwrap(), a);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(again.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 42);
    assert_eq!(summary["thresholds"].as_array().unwrap().len(), 2);
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["sweep", "--model", "Qp", "--p0-grid", "0.05,0.1", "--trials", "500", "--out", "rel"])
        .env("MAJORANA_QEC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("rel.csv").exists());
    assert!(dir.path().join("rel.json").exists());
}

#[test]
fn unbracketed_threshold_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&[
        "threshold", "--model", "Qp", "--p0-grid", "0.3,0.4", "--trials", "2000", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "unbracketed");
}

#[test]
fn threshold_reports_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&[
        "threshold", "--model", "Qp", "--r", "0.1", "--p0-grid", "0.05,0.09,0.13", "--trials", "20000",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = v["p_th"].as_f64().unwrap();
    assert!(p > 0.05 && p < 0.13);
}

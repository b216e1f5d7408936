use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nw")).args(args).env_remove("NW_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn analyze_reference_parameters() {
    let out = nw(&["analyze", "--p", "365", "--tau", "0.07"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let r = &v["report"];
    assert!((r["mu"].as_f64().unwrap() - 33.6409).abs() < 1e-3);
    assert!((r["qbar2"].as_f64().unwrap() + 0.05058).abs() < 1e-4);
    assert!((r["zeta"].as_f64().unwrap() - 6.4659).abs() < 1e-3);
    assert!((r["lnp"].as_f64().unwrap() - 5.8999).abs() < 1e-3);
    assert_eq!(r["theorem1"], Value::Bool(true));
    assert_eq!(v["units"]["mu"], "1/time");
}

#[test]
fn analyze_below_the_overshoot_range() {
    let v = json(&nw(&["analyze", "--p", "2", "--tau", "0.1"]));
    assert_eq!(v["report"]["theorem1"], Value::Bool(false));
    assert_eq!(v["report"]["tail"], "monotone");
}

#[test]
fn analyze_with_speed_adds_membership() {
    let v = json(&nw(&["analyze", "--p", "365", "--tau", "0.07", "--c", "10"]));
    let r = &v["report"];
    assert_eq!(r["membership"]["in_dm"], Value::Bool(true));
    assert_eq!(r["classify_tail"], "EventuallyMonotone");
    assert!(r["c_star"].as_f64().unwrap() > 7.8);
}

#[test]
fn exit_codes() {
    assert_eq!(nw(&["analyze", "--bogus"]).status.code(), Some(64));
    assert_eq!(nw(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(nw(&["analyze", "--p", "0.5", "--tau", "0.1"]).status.code(), Some(1));
    assert_eq!(nw(&["verify", "--suite", "model", "--grid", "1"]).status.code(), Some(64));
    assert_eq!(nw(&["--help"]).status.code(), Some(0));
    let bad_env = Command::new(env!("CARGO_BIN_EXE_nw"))
        .args(["verify", "--suite", "model"])
        .env("NW_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(64));
}

#[test]
fn verify_suites_pass_and_write_margins() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["appendix", "series", "model"] {
        let file = path(dir.path(), &format!("{suite}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_nw"))
            .args(["verify", "--suite", suite, "--out", &file])
            .env("NW_THREADS", "2")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("check,value,relation,threshold,passed\n"));
        assert!(!text.contains(",false"), "{text}");
        assert_eq!(json(&out)["passed"], Value::Bool(true));
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "verify");
}

#[test]
fn series_output_is_deterministic_and_listed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let (c, p) = (path(dir.path(), &format!("c{tag}.csv")), path(dir.path(), &format!("p{tag}.csv")));
        let out = nw(&["series", "--p", "365", "--tau", "0.07", "--out", &format!("{c},{p}")]);
        assert!(out.status.success());
        (fs::read(&c).unwrap(), fs::read(&p).unwrap())
    };
    let a = run("1");
    let b = run("2");
    assert_eq!(a, b);
    let coeffs = String::from_utf8(a.0).unwrap();
    assert!(coeffs.starts_with("n,qbar\n1,1\n2,-0.0505"));
    assert_eq!(coeffs.lines().count(), 41);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.iter().any(|o| o.ends_with("c2.csv")) && outputs.iter().any(|o| o.ends_with("p2.csv")));
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn heteroclinic_reports_one_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let (t, c) = (path(dir.path(), "traj.csv"), path(dir.path(), "crossings.json"));
    let out = nw(&["heteroclinic", "--p", "365", "--tau", "0.07", "--out", &format!("{t},{c}")]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(v["report"]["count"], 1);
    assert_eq!(v["report"]["tail_class"], "MonotoneTail");
    assert!(fs::read_to_string(&t).unwrap().starts_with("t,u,du\n"));
}

#[test]
fn atlas_and_boundaries_tables() {
    let dir = tempfile::tempdir().unwrap();
    let fig = path(dir.path(), "fig2.csv");
    assert!(nw(&["atlas", "--tau", "0.01:0.3:6", "--p", "8:1e4:5", "--out", &fig]).status.success());
    let text = fs::read_to_string(&fig).unwrap();
    assert!(text.starts_with("tau,ln_ln_p,p,in_frak_i,zeta_gt_lnp,flag\n"));
    assert_eq!(text.lines().count(), 31);

    let curves = path(dir.path(), "curves.csv");
    assert!(nw(&["boundaries", "--P", "4.8999", "--c", "0.1:100:7", "--out", &curves]).status.success());
    let rows: Vec<Vec<f64>> = fs::read_to_string(&curves)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert!(r[1] < r[2], "T(c) < tau(c) at c = {}", r[0]);
    }
    assert!(nw(&["atlas", "--tau", "0.01:0.3", "--p", "8:1e4:5", "--out", &fig]).status.code() == Some(64));
}

#[test]
fn simulate_from_config_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
  "params": {"p": 365.0, "tau": 0.07},
  "domain": [-60.0, 60.0],
  "dx": 0.2,
  "dt": 0.01,
  "t_end": 1.0,
  "scheme": "CrankNicolson",
  "ic": {"kind": "exp_tail", "beta": 0.7, "cap": 5.8998973535824915},
  "bc": {"kind": "dirichlet", "lo": 0.0, "hi": 5.8998973535824915},
  "snapshot_times": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}"#,
    )
    .unwrap();
    let (s, f, m) = (path(dir.path(), "snaps.csv"), path(dir.path(), "front.csv"), path(dir.path(), "meta.json"));
    let out = nw(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &format!("{s},{f},{m}")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let speed = json(&out)["report"]["speed"].as_f64().unwrap();
    assert!((46.0..54.0).contains(&speed), "{speed}");

    // the manifest's resolved config reproduces the run
    let meta: Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(meta["outputs"].as_array().unwrap().len(), 2);
    let again = dir.path().join("again.json");
    fs::write(&again, serde_json::to_string(&meta["config"]).unwrap()).unwrap();
    let s2 = path(dir.path(), "snaps2.csv");
    let f2 = path(dir.path(), "front2.csv");
    let m2 = path(dir.path(), "meta2.json");
    assert!(nw(&["simulate", "--config", again.to_str().unwrap(), "--out", &format!("{s2},{f2},{m2}")])
        .status
        .success());
    assert_eq!(fs::read(&s).unwrap(), fs::read(&s2).unwrap());
    assert_eq!(fs::read(&f).unwrap(), fs::read(&f2).unwrap());

    let d = path(dir.path(), "diag.json");
    let prof = path(dir.path(), "profile.csv");
    let out = nw(&["diagnose", "--in", &s, "--p", "365", "--tau", "0.07", "--out", &format!("{d},{prof}")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diag: Value = serde_json::from_str(&fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(diag["report"]["direction"], "Left");
    assert!((diag["report"]["speed"].as_f64().unwrap() - speed).abs() < 0.5);
    assert!(fs::read_to_string(&prof).unwrap().starts_with("xi,u\n"));
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"params": {"p": 365.0, "tau": 0.07}, "domain": [0, 1]}"#).unwrap();
    let out = path(dir.path(), "s.csv");
    assert_eq!(nw(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out]).status.code(), Some(1));
    assert_eq!(nw(&["simulate", "--out", &out]).status.code(), Some(64));
    assert_eq!(nw(&["simulate", "--preset", "fig9", "--out", &out]).status.code(), Some(64));
}

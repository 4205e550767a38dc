use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use painleve_core::dynamics::{integrate, linspace, HamiltonianSystem, IntegratorOptions, SystemId};
use painleve_core::io::{read_params, read_state, read_trajectory_csv};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_painleve"));
    c.env("NO_COLOR", "1");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Generic rank-one parameters and a symmetric state.
fn fixtures(dir: &Path) -> (PathBuf, PathBuf) {
    let p = write(dir, "p.json", r#"{"n": 1, "alpha": [0.3, 0.2, -0.15, 0.65], "eta": 0.1}"#);
    let s = write(dir, "s.json", r#"{"t": 0.3, "x": [0.4, 1.3], "y": [0.2, -0.1]}"#);
    (p, s)
}

#[test]
fn hg_eval_matches_logarithm() {
    let v = json(&run(&["hg", "eval", "--upper", "1,1", "--lower", "2", "--t", "0.5"]));
    let value = v["value"][0].as_f64().unwrap();
    assert!((value - 2.0 * 2f64.ln()).abs() < 1e-12);
    assert!(v["terms_used"].as_u64().unwrap() > 10);
}

#[test]
fn hg_eval_accepts_negative_and_complex_parameters() {
    // terminating: 1 - 12 + 24
    let v = json(&run(&["hg", "eval", "--upper", "-2,1", "--lower", "0.5", "--t", "3"]));
    assert_eq!(v["value"][0].as_f64().unwrap(), 13.0);
    // 1F0(1;;t) = 1/(1-t)
    let v = json(&run(&["hg", "eval", "--upper", "1", "--t", "0.5+0.1i"]));
    let want = num_complex::Complex64::new(1.0, 0.0) / num_complex::Complex64::new(0.5, -0.1);
    assert!((v["value"][0].as_f64().unwrap() - want.re).abs() < 1e-11);
    assert!((v["value"][1].as_f64().unwrap() - want.im).abs() < 1e-11);
}

#[test]
fn hg_eval_without_factorial() {
    // coefficients (1)_i/(1)_i = 1: the geometric series
    let v = json(&run(&["hg", "eval", "--upper", "1", "--lower", "1", "--t", "0.25", "--no-factorial"]));
    assert!((v["value"][0].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    // with the factorial it is exp(t)
    let v = json(&run(&["hg", "eval", "--upper", "1", "--lower", "1", "--t", "0.25"]));
    assert!((v["value"][0].as_f64().unwrap() - 0.25f64.exp()).abs() < 1e-12);
}

#[test]
fn linear_build_and_fundamental() {
    let dir = TempDir::new().unwrap();
    let (p, _) = fixtures(dir.path());
    let out = dir.path().join("sys.json");
    let o = run(&["linear", "build", "--params", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let sys: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sys["a0"].as_array().unwrap().len(), 2);
    assert_eq!(sys["kind"], "fuchsian");
    let v = json(&run(&["linear", "dual", "--params", p.to_str().unwrap()]));
    assert_eq!(v["a1"].as_array().unwrap().len(), 2);
    for k in ["0", "1"] {
        let v = json(&run(&[
            "linear", "fundamental", "--params", p.to_str().unwrap(), "-k", k, "--depth", "4", "--eval-at", "0.2",
        ]));
        assert!(v["residual"].as_f64().unwrap() < 1e-8);
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn confluent_requires_degenerate_kind() {
    let dir = TempDir::new().unwrap();
    let bad = run(&["linear", "confluent", "--params", fixtures(dir.path()).0.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(255));
    let d = write(dir.path(), "d.json", r#"{"n": 1, "alpha": [0.0, 0.2, -0.15, 0.95], "kind": {"degenerate": 1}}"#);
    let v = json(&run(&["linear", "confluent", "--params", d.to_str().unwrap()]));
    assert_eq!(v["kind"], "confluent");
    let v = json(&run(&["linear", "fundamental", "--params", d.to_str().unwrap(), "-k", "1", "--eval-at", "0.5"]));
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn integrate_csv_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let (p, s) = fixtures(dir.path());
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "integrate", "--system", "symmetric", "--params", p.to_str().unwrap(), "--from", s.to_str().unwrap(),
        "--t1", "0.5", "--samples", "11", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, times, states) = read_trajectory_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(header[0], "t");
    assert_eq!(header[1], "re_x0");
    assert_eq!(times.len(), 11);
    // the same integration in-process gives identical numbers
    let sys = HamiltonianSystem::new(SystemId::Symmetric, read_params(&p).unwrap()).unwrap();
    let start = read_state(&s).unwrap();
    let opts = IntegratorOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
    let tr = integrate(|t, z| sys.field(t, z), 0.3, &start.z, 0.5, &linspace(0.3, 0.5, 11), &opts).unwrap();
    assert_eq!(times, tr.times);
    assert_eq!(states, tr.states);
}

#[test]
fn integrate_rejects_mismatched_state() {
    let dir = TempDir::new().unwrap();
    let (p, s) = fixtures(dir.path());
    let o = run(&["integrate", "--system", "cp6", "--params", p.to_str().unwrap(), "--from", s.to_str().unwrap(), "--t1", "0.5"]);
    assert_eq!(o.status.code(), Some(255));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state has"));
}

#[test]
fn plot_series_has_nineteen_rows() {
    let o = run(&["plot", "series", "--upper", "1,1", "--lower", "2", "--t0", "0", "--t1", "0.9", "--step", "0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,re,im,terms");
    assert_eq!(lines.len(), 1 + 19);
}

#[test]
fn plot_residual_sweep_decreases() {
    let dir = TempDir::new().unwrap();
    let (p, _) = fixtures(dir.path());
    let o = run(&["plot", "residual-sweep", "--params", p.to_str().unwrap(), "--depths", "2,4,8,16", "--t", "0.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let res: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(res.len(), 4);
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn plot_trajectory_matches_integrate() {
    let dir = TempDir::new().unwrap();
    let (p, s) = fixtures(dir.path());
    let args = ["--system", "symmetric", "--params", p.to_str().unwrap(), "--from", s.to_str().unwrap(), "--t1", "0.4"];
    let a = run(&[&["integrate"][..], &args].concat());
    let b = run(&[&["plot", "trajectory"][..], &args].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn weyl_generator_is_an_involution() {
    let dir = TempDir::new().unwrap();
    let (p, s) = fixtures(dir.path());
    let v = json(&run(&["weyl", "apply", "--word", "1,1", "--params", p.to_str().unwrap(), "--state", s.to_str().unwrap()]));
    let x = v["state"]["x"].as_array().unwrap();
    assert!((x[0].as_f64().unwrap() - 0.4).abs() < 1e-14);
    assert!((x[1].as_f64().unwrap() - 1.3).abs() < 1e-14);
    assert!((v["params"]["alpha"][1].as_f64().unwrap() - 0.2).abs() < 1e-15);
    let v = json(&run(&["weyl", "apply", "--word", "0,3,1", "--params", p.to_str().unwrap(), "--state", s.to_str().unwrap(), "--t", "0.3"]));
    assert_eq!(v["word"], "[0,3,1]");
    let sum: f64 = v["params"]["alpha"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-14);
}

#[test]
fn weyl_verify_relations_exit_code() {
    let o = run(&["weyl", "verify-relations", "-n", "2", "--trials", "20", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("21 of 21 relations"));
    // an impossible bound makes the command fail
    let o = run(&["weyl", "verify-relations", "-n", "1", "--trials", "5", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_gradients_reports_pass() {
    for system in ["cp6", "symmetric", "degenerate", "p5", "p3", "n2r1", "n2r2", "n2r3"] {
        let v = json(&run(&["dynamics", "check-gradients", "--system", system, "--seed", "4", "--points", "20"]));
        assert_eq!(v["pass"], true, "{system}");
    }
}

#[test]
fn verify_is_deterministic_and_uncolored() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let oa = run(&["verify", "weyl", "-n", "1", "--seed", "5", "--no-timing", "--jobs", "1", "--json", a.to_str().unwrap()]);
    let ob = run(&["verify", "weyl", "-n", "1", "--seed", "5", "--no-timing", "--jobs", "2", "--json", b.to_str().unwrap()]);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(oa.stdout, ob.stdout);
    assert!(!stdout(&oa).contains('\x1b'));
    let doc: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(doc["failures"], 0);
    assert_eq!(doc["reports"][0]["wall_time_s"], Value::Null);
    assert!(doc["reports"][0]["measurements"][0]["statement"].as_str().unwrap().contains("Weyl"));
}

#[test]
fn verify_rejects_bad_ranges() {
    assert_eq!(run(&["verify", "particular", "-n", "5"]).status.code(), Some(255));
    assert_eq!(run(&["verify", "degeneration", "-n", "1", "-r", "3"]).status.code(), Some(255));
    assert_eq!(run(&["verify", "criteria", "-k", "11"]).status.code(), Some(255));
}

#[test]
fn verify_single_criterion() {
    let o = run(&["verify", "criteria", "-k", "4", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS criterion 4"));
}

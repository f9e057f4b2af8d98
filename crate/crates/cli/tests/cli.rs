use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lindyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindyn")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn explicit(u: f64, w: f64, y: f64) -> String {
    format!(
        r#"{{"hyperparams":{{"eta_u":1,"eta_w":1,"gamma":1,"d":1,"d0":1}},
            "init":{{"kind":"explicit","u":[{u}],"W":[[{w}]]}},
            "data":{{"kind":"point","x":[1],"y":{y}}}}}"#
    )
}

const GAUSSIAN: &str = r#"{
  "hyperparams": {"eta_u": 0.7, "eta_w": 1.3, "gamma": 0.5, "d": 6, "d0": 3},
  "init": {"kind": "gaussian", "sigma_u": 0.5, "sigma_w": 0.5, "seed": 1},
  "data": {"kind": "synthetic", "direction": [1, 2, -1], "n": 40, "slope": 1.5, "noise": 0.1, "seed": 1}
}"#;

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn worked_instance_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "w.json", &explicit(0.0, 1.0, 1.0));
    let out = lindyn(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s = json(&out);
    assert!((s["t_c"].as_f64().unwrap() - 0.894427).abs() < 1e-6);
    assert!((s["alpha_plus"].as_f64().unwrap() - 4.236068).abs() < 1e-6);
    assert_eq!(s["degenerate"], false);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"hyperparams": {"eta_u": 1, "gama": 1}}"#);
    let out = lindyn(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json:1:"));

    let frozen = write(dir.path(), "frozen.json", &explicit(1.0, 1.0, 0.0));
    assert_eq!(code(&lindyn(&["solve", frozen.to_str().unwrap()])), 3);

    let ok = write(dir.path(), "ok.json", &explicit(0.0, 1.0, 1.0));
    assert_eq!(code(&lindyn(&["compare", ok.to_str().unwrap()])), 0);
    assert_eq!(code(&lindyn(&["compare", ok.to_str().unwrap(), "--inject-printed-first-layer"])), 4);

    assert_eq!(code(&lindyn(&["phase", "--scaling", "bogus"])), 2);
    assert_eq!(code(&lindyn(&["nonsense"])), 2);
}

#[test]
fn zero_first_variable_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p0.json", &explicit(-1.0, 1.0, 1.0));
    let out = lindyn(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s = json(&out);
    assert_eq!(s["P"], 0.0);
    assert_eq!(s["degenerate"], true);
}

#[test]
fn balanced_init_without_target_keeps_its_scale() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sym.json", &explicit(0.0, 1.0, 0.0));
    let s = json(&lindyn(&["solve", cfg.to_str().unwrap()]));
    assert!((s["alpha_plus"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "g.json", GAUSSIAN);
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = lindyn(&["integrate", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (out.stdout, std::fs::read(csv).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));

    let reseeded = lindyn(&["solve", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_ne!(json(&reseeded)["P"], json(&lindyn(&["solve", cfg.to_str().unwrap()]))["P"]);
}

#[test]
fn linear_compare_batch_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "g.json", GAUSSIAN);
    let out = lindyn(&["compare", cfg.to_str().unwrap(), "--seeds", "100", "--samples", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 100);
    assert!(reports.iter().all(|r| r["pass"] == true));
}

#[test]
fn quadratic_compare_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "b2.json",
        r#"{
          "hyperparams": {"eta_u": 1, "eta_w": 1, "gamma": 0.5, "beta": 2, "d": 3, "d0": 2},
          "init": {"kind": "gaussian", "sigma_u": 0.6, "sigma_w": 0.6, "seed": 4},
          "data": {"kind": "point", "x": [0.8, -0.5], "y": 0.7},
          "grid": {"t_end": 10, "samples": 50}
        }"#,
    );
    let out = lindyn(&["compare", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["pass"], true);

    assert_eq!(code(&lindyn(&["solve", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&lindyn(&["solve", cfg.to_str().unwrap(), "--reduced-ode"])), 0);
}

#[test]
fn tabulated_base_phases() {
    let expected = [
        ("ntk", "kernel"),
        ("mf", "frozen"),
        ("xavier", "feature_learning"),
        ("kaiming", "unstable"),
        ("lazy", "unstable"),
    ];
    for (scaling, phase) in expected {
        let out = lindyn(&["phase", "--scaling", scaling]);
        assert_eq!(code(&out), 0);
        assert_eq!(json(&out)["phase"], phase, "{scaling}");
    }
}

#[test]
fn scan_boundary_follows_stability_exponent() {
    let out = lindyn(&[
        "scan", "--scaling", "kaiming", "--x", "c_gamma", "--y", "c_eta", "--x-range=-2:1:1/2", "--y-range=-3:1:1/2",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_exp,y_exp,phase,delta"));
    let q = |s: &str| match s.split_once('/') {
        Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
        None => s.parse::<f64>().unwrap(),
    };
    let mut cells = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (cg, ce) = (q(f[0]), q(f[1]));
        let s = (2.0 * cg + 2.0 * ce).max(2.0 * cg + ce + 1.0);
        let want = if s > 0.0 {
            "unstable"
        } else if s < 0.0 {
            "frozen"
        } else {
            f[2]
        };
        assert_eq!(f[2], want, "c_gamma {cg}, c_eta {ce}");
        if s == 0.0 {
            assert!(f[2] == "kernel" || f[2] == "feature_learning");
        }
        cells += 1;
    }
    assert_eq!(cells, 7 * 9);
}

#[test]
fn verify_lists_discrepancies() {
    let out = lindyn(&["verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("documented discrepancies (7)"));
    assert!(!text.contains("FAIL"));
    assert_eq!(text.matches("CONFIRMED").count() - text.matches("UNCONFIRMED").count(), 7);
}

#[test]
fn thread_count_does_not_change_scan() {
    let args = ["scan", "--scaling", "ntk", "--x", "c_u", "--y", "c_w", "--x-range=-2:2:1/2", "--y-range=-2:2:1/2"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lindyn")).args(args).env("LINDYN_THREADS", threads).output().unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
}

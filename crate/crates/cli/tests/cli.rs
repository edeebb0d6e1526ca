use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn htrans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_htrans"))
        .args(args)
        .output()
        .expect("htrans runs")
}

fn run_config(command: &str, name: &str, extra: &[&str]) -> (Output, Value) {
    let path = configs().join(name);
    let mut args = vec![command, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = htrans(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, report)
}

fn temp_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("htrans-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn config_error(command: &str, body: &str) -> Value {
    let path = temp_config(&format!("{command}-{:x}.json", body.len()), body);
    let out = htrans(&[command, "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    err["error"].clone()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn shipped_fast_configs_pass() {
    for (command, name) in [
        ("check-cm", "check_cm_eg_su2.json"),
        ("check-cm", "check_cm_b_u1.json"),
        ("check-cm", "check_cm_aut_inner_su2.json"),
        ("holonomy", "holonomy_su2.json"),
        ("surface", "surface_eg_su2.json"),
        ("surface", "surface_bent_strip.json"),
        ("transgress", "transgress_cylinder.json"),
        ("bf", "bf_shifted.json"),
    ] {
        let (out, report) = run_config(command, name, &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report["pass"], true, "{name}");
    }
}

#[test]
fn shipped_roundtrip_and_bf_configs_pass() {
    for (command, name) in [("roundtrip", "roundtrip_b_u1.json"), ("bf", "bf_flat.json")] {
        let (out, report) = run_config(command, name, &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report["pass"], true, "{name}");
    }
}

#[test]
fn check_fc_accepts_the_eg_example() {
    let (out, report) = run_config("check-fc", "check_fc_eg_su2.json", &[]);
    assert!(out.status.success());
    assert!(f(&report["result"]["max_residual"]) <= 1e-5);
    assert_eq!(report["result"]["pass"], true);
}

#[test]
fn check_fc_rejection_sets_the_exit_code() {
    let (out, report) = run_config("check-fc", "check_fc_rejected.json", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report["pass"], false);
    assert!(f(&report["result"]["max_residual"]) >= 0.1);
}

#[test]
fn zero_pair_surface_transport_is_the_identity() {
    let (out, report) = run_config("surface", "surface_zero_pair.json", &[]);
    assert!(out.status.success());
    let k = &report["result"]["k"]["matrix"];
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_eq!(f(&k["re"][i][j]), want);
            assert_eq!(f(&k["im"][i][j]), 0.0);
        }
    }
}

#[test]
fn stokes_example_is_within_tolerance() {
    let (out, report) = run_config("stokes", "stokes_su2.json", &[]);
    assert!(out.status.success());
    assert!(f(&report["result"]["error"]) <= 1e-5);
}

#[test]
fn holonomy_ignores_the_sitting_profile() {
    let (_, plain) = run_config("holonomy", "holonomy_su2.json", &[]);
    let (_, sitting) = run_config("holonomy", "holonomy_su2_sitting.json", &[]);
    let (a, b) = (&plain["result"]["g"]["matrix"], &sitting["result"]["g"]["matrix"]);
    for part in ["re", "im"] {
        for i in 0..2 {
            for j in 0..2 {
                assert!((f(&a[part][i][j]) - f(&b[part][i][j])).abs() <= 1e-7);
            }
        }
    }
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    for (command, name) in [("check-fc", "check_fc_eg_su2.json"), ("surface", "surface_eg_su2.json")] {
        let (a, _) = run_config(command, name, &["--seed", "42"]);
        let (b, _) = run_config(command, name, &["--seed", "42"]);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn reports_embed_hash_version_seed_and_tolerances() {
    let (_, report) = run_config("check-cm", "check_cm_eg_su2.json", &["--seed", "9"]);
    let bytes = std::fs::read(configs().join("check_cm_eg_su2.json")).unwrap();
    use sha2::Digest;
    assert_eq!(report["config_sha256"], hex::encode(sha2::Sha256::digest(&bytes)));
    assert_eq!(report["tool"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["seed"], 9);
    for key in ["axioms", "fake_curvature", "stokes", "target_matching", "transgression"] {
        assert!(report["tolerances"][key].is_number(), "{key}");
    }
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let (out, _) = run_config("holonomy", "holonomy_su2.json", &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("group_residual")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17, "{line}");
}

#[test]
fn out_flag_writes_the_report() {
    let dest = std::env::temp_dir().join(format!("htrans-out-{}.json", std::process::id()));
    let (to_file, _) = run_config("check-cm", "check_cm_b_u1.json", &["--out", dest.to_str().unwrap()]);
    assert!(to_file.status.success() && to_file.stdout.is_empty());
    let (to_stdout, _) = run_config("check-cm", "check_cm_b_u1.json", &[]);
    assert_eq!(std::fs::read(&dest).unwrap(), to_stdout.stdout);
}

#[test]
fn steps_flag_overrides_every_step_count() {
    let (_, report) = run_config("holonomy", "holonomy_su2.json", &["--steps", "33"]);
    let i = &report["integrator"];
    assert_eq!(i["n_steps_path"], 33);
    assert_eq!(i["n_steps_surface_s"], 33);
    assert_eq!(i["n_quad_t"], 34);
}

#[test]
fn schema_violations_are_located() {
    let e = config_error("check-cm", r#"{"ambient_dim": 2}"#);
    assert_eq!(e["pointer"], "");
    let e = config_error("check-cm", r#"{"crossed_module": "eg:su2", "ambient_dim": "two"}"#);
    assert_eq!(e["pointer"], "/ambient_dim");
    let e = config_error(
        "check-cm",
        r#"{"crossed_module": "eg:su2", "ambient_dim": 1, "integrator": {"n_steps_path": 0}}"#,
    );
    assert_eq!(e["pointer"], "/integrator/n_steps_path");
}

#[test]
fn semantic_errors_are_located() {
    let e = config_error(
        "check-fc",
        r#"{"crossed_module": "eg:su2", "ambient_dim": 2,
            "a": [[["0", "1"], ["-1", "0"]], [["0", "x3"], ["-x3", "0"]]]}"#,
    );
    assert_eq!(e["pointer"], "/a/1/0/1");
    let e = config_error(
        "check-fc",
        r#"{"crossed_module": "eg:su2", "ambient_dim": 2,
            "b": [{"plane": [1, 3], "value": [["0", "0"], ["0", "0"]]}]}"#,
    );
    assert_eq!(e["pointer"], "/b/0/plane");
    let e = config_error("check-cm", r#"{"crossed_module": "eg:nonsense", "ambient_dim": 1}"#);
    assert_eq!(e["pointer"], "/crossed_module");
    let e = config_error("stokes", r#"{"crossed_module": "eg:su2", "ambient_dim": 2, "loop": ["z", "0"]}"#);
    assert_eq!(e["pointer"], "/loop");
    let e = config_error("surface", r#"{"command": "stokes", "crossed_module": "eg:su2", "ambient_dim": 2}"#);
    assert_eq!(e["pointer"], "/command");
    let e = config_error(
        "surface",
        r#"{"crossed_module": "eg:su2", "ambient_dim": 2, "b": [{"plane": [1, 2], "value": [["0.1*i", "0"], ["0", "-0.1*i"]]}],
            "bigon": {"map": ["t", "s*t*(1 - t)"]}}"#,
    );
    assert_eq!(e["pointer"], "/b");
    let e = config_error(
        "surface",
        r#"{"crossed_module": "eg:su2", "ambient_dim": 2, "bigon": {"map": ["t + s", "t"]}}"#,
    );
    assert_eq!(e["pointer"], "/bigon/map");
}

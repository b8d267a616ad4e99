use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dyadica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadica"))
        .args(args)
        .env("DYADICA_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bad_config_exits_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[tolerances]\naccretivity = \"high\"\n");
    let out = dyadica(&["gnorm", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tolerances.accretivity"), "{err}");

    let unknown = write_config(dir.path(), "unknown.toml", "[kernel]\nkind = \"zero\"\nwidth = 3\n");
    let out = dyadica(&["schema", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_prints_and_validates() {
    let out = dyadica(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "schema.toml", &text);
    let out = dyadica(&["schema", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
}

#[test]
fn zero_kernel_has_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", "[kernel]\nkind = \"zero\"\n");
    let out = dyadica(&["gnorm", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "gnorm");
    assert_eq!(v["results"]["g_norm_sq"].as_f64(), Some(0.0));
}

#[test]
fn large_r_makes_every_cube_good() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pi.toml", "[lattice_n]\nr = 6\ngamma = 0.25\n");
    let out = dyadica(&["pigood", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let pi = v["results"]["pi"].as_array().unwrap();
    assert_eq!(pi.len(), 5);
    assert!(pi.iter().all(|e| e["value"].as_f64() == Some(1.0)));
}

#[test]
fn carleson_writes_a_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[measure_n]\ndepth = 3\n[measure_m]\ndepth = 3\n[carleson]\nomegas = 4\n");
    let path = dir.path().join("table.csv");
    let out = dyadica(&["carleson", "--config", &cfg, "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert!(r.headers().unwrap().len() >= 2);
    assert!(r.records().count() > 0);
}

#[test]
fn violator_fails_the_carleson_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.toml",
        "[measure_n]\ndepth = 3\n[measure_m]\ndepth = 3\n[kernel]\nkind = \"violator\"\n[carleson]\nomegas = 4\n",
    );
    let out = dyadica(&["carleson", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn identical_runs_emit_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.toml", "seed = 9\n[measure_n]\ndepth = 3\n[measure_m]\ndepth = 3\n");
    for args in [["gnorm", "--format", "json"], ["verify-haar", "--format", "csv"]] {
        let mut full = args.to_vec();
        full.extend(["--config", &cfg]);
        let a = dyadica(&full);
        let b = dyadica(&full);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let out = dyadica(&["pigood", "--seed", "42", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed 42"));
}

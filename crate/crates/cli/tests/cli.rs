use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpse(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpse"))
        .args(args)
        .current_dir(dir)
        .env("QPSE_THREADS", "1")
        .output()
        .expect("spawn qpse")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const COHERENT_3D: &str = r#"{
  "schema": 1,
  "grid": {"dim": 3, "points": 64, "extent": 20},
  "state": {"kind": "gaussian", "sigma": 1}
}"#;

#[test]
fn coherent_gaussian_in_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "spec.json", COHERENT_3D);
    let o = qpse(
        &[
            "entropy",
            "--spec",
            "spec.json",
            "--out",
            "out",
            "--precision",
            "12",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("out/entropy.json"));
    let s = doc["entropy"]["s_total"].as_f64().unwrap();
    assert!((s - 6.434_189_657_548_201).abs() < 1e-6, "{s}");
    assert_eq!(doc["entropy"]["dim"], 3);
}

#[test]
fn small_box_trips_the_grid_guard() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"schema": 1, "grid": {"dim": 1, "points": 256, "extent": 4}, "state": {"kind": "gaussian", "sigma": 1}}"#,
    );
    let o = qpse(&["entropy", "spec.json", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("GridTooSmall"), "{}", stderr(&o));
    assert!(!dir.path().join("out/entropy.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{
  "schema": 1,
  "seed": 11,
  "grid": {"dim": 1, "points": 1024, "extent": 40},
  "state": {"kind": "random_superposition", "terms": 3, "max_order": 6, "sigma": 1},
  "transforms": [
    {"kind": "translate_x", "amount": 1.3},
    {"kind": "dilate", "amount": 2},
    {"kind": "lorentz_boost_k", "amount": 0.5, "mass": 1}
  ],
  "evolution": {"dt": 0.01, "horizon": 0.5, "record_every": 5}
}"#,
    );
    let a = qpse(&["run", "spec.json", "--out", "a"], dir.path());
    let b = qpse(&["run", "spec.json", "--out", "b"], dir.path());
    assert!(a.status.success() && b.status.success(), "{}", stderr(&a));
    for name in ["run.json", "evolution.csv"] {
        let x = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let c = qpse(
        &["run", "spec.json", "--out", "c", "--seed", "12"],
        dir.path(),
    );
    assert!(c.status.success());
    assert_ne!(
        std::fs::read(dir.path().join("a/run.json")).unwrap(),
        std::fs::read(dir.path().join("c/run.json")).unwrap()
    );
}

#[test]
fn spin_pair_at_quarter_pi() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpse(&["spin", "--theta", "0.7853981634"], dir.path());
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 4.368_901_313_378_636).abs() < 1e-6, "{v}");
}

#[test]
fn evolve_csv_matches_spreading_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{
  "schema": 1,
  "grid": {"dim": 1, "points": 1024, "extent": 40},
  "state": {"kind": "gaussian", "sigma": 1},
  "evolution": {"potential": "free", "dt": 0.01, "horizon": 2.0, "record_every": 20},
  "outputs": {"csv": "series.csv", "precision": 12}
}"#,
    );
    let o = qpse(
        &["evolve", "--spec", "spec.json", "--out", "out"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,s_r,s_k,s_total,bbm_margin,norm_residual")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    let last = rows.last().unwrap();
    assert!((last[0] - 2.0).abs() < 1e-12);
    // S_r = ½ ln(2πe·2) at t = 2, S_k fixed at its initial value.
    let s_r = 0.5 * (4.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let s_k = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() - 2f64.ln();
    assert!((last[3] - (s_r + s_k)).abs() < 1e-4, "{}", last[3]);
    assert!(dir.path().join("out/evolve.json").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpse(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn validation_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        "{\n  \"schema\": 1,\n  \"grid\": {\"dim\": 1, \"points\": 256, \"extent\": 40},\n  \"state\": {\"kind\": \"gaussian\", \"sigma\": 1},\n  \"colour\": \"red\"\n}\n",
    );
    let o = qpse(&["entropy", "spec.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("spec.json:5:"), "{err}");
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn semantic_errors_point_at_the_state() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        "{\n  \"schema\": 1,\n  \"grid\": {\"dim\": 1, \"points\": 256, \"extent\": 40},\n  \"state\": {\"kind\": \"two_particle_gaussian\", \"sigma\": 1, \"correlation\": 0.5}\n}\n",
    );
    let o = qpse(&["entropy", "spec.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spec.json:4:"), "{}", stderr(&o));
}

#[test]
fn aliased_boost_is_a_guard() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"schema": 1, "grid": {"dim": 1, "points": 256, "extent": 40},
 "state": {"kind": "gaussian", "sigma": 1}, "transforms": [{"kind": "translate_k", "amount": 19.0}]}"#,
    );
    let o = qpse(&["invariance", "spec.json", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("AliasedMomentum"), "{}", stderr(&o));
}

#[test]
fn invariance_reports_deltas() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"schema": 1, "grid": {"dim": 1, "points": 1024, "extent": 40},
 "state": {"kind": "gaussian", "sigma": 1},
 "transforms": [{"kind": "dilate", "amount": 2}, {"kind": "parity"}, {"kind": "lorentz_boost_k", "amount": 0.5}]}"#,
    );
    let o = qpse(&["invariance", "spec.json", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("out/invariance.json"));
    let items = doc["transforms"].as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert!((items[0]["delta_s_r"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-8);
    assert!(items[0]["delta_s_total"].as_f64().unwrap().abs() < 1e-8);
    assert!(items[2]["residual"].as_f64().unwrap() < 1e-8);
    assert!(doc.get("entropy").is_none());
}

#[test]
fn spinor_packet_includes_spin_entropy() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"schema": 1, "grid": {"dim": 1, "points": 1024, "extent": 40},
 "state": {"kind": "spinor_packet", "sigma": 1}}"#,
    );
    let o = qpse(&["entropy", "spec.json", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("out/entropy.json"));
    let spin = doc["entropy"]["s_spin"].as_f64().unwrap();
    assert!((spin - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-9);
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qpse"))
        .args(["spin", "--theta", "0.3"])
        .current_dir(dir.path())
        .env("QPSE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("QPSE_THREADS"));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpse(&["verify"], dir.path());
    let table = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(o.status.success(), "{table}");
    for property in [
        "spin entropy",
        "entangled spin pair",
        "minimum entropy",
        "entropic uncertainty",
        "point transformation",
        "reference frame",
        "CPT",
        "Lorentz scalar",
    ] {
        assert!(table.contains(property), "missing {property}");
    }
    assert!(!table.contains("FAIL"));
}

#[test]
fn spin_term_carries_through_the_series() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "spec.json",
        r#"{"schema": 1, "grid": {"dim": 1, "points": 1024, "extent": 40},
 "state": {"kind": "gaussian", "sigma": 1}, "spin": "1/2",
 "evolution": {"dt": 0.01, "steps": 10}, "outputs": {"precision": 17}}"#,
    );
    let o = qpse(&["run", "spec.json", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("out/run.json"));
    let report = &doc["entropy"];
    let s_spin = report["s_spin"].as_f64().unwrap();
    assert!((s_spin - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    let text = std::fs::read_to_string(dir.path().join("out/evolution.csv")).unwrap();
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert!((first[3] - report["s_total"].as_f64().unwrap()).abs() < 1e-12);
    assert!((first[3] - first[1] - first[2] - s_spin).abs() < 1e-12);
}

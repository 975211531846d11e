use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

fn todaflow(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_todaflow"))
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env("TODAFLOW_LOG", "error")
        .output()
        .expect("run todaflow")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed(m: &Value) -> Vec<String> {
    m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap().to_string())
        .collect()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

#[test]
fn circle_grows_to_radius_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let result = todaflow(&scenario("circle_law"), &out, &[]);
    assert_eq!(
        result.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["complete"], true);
    let files = listed(&m);
    assert!(files.contains(&"trajectory.csv".to_string()));
    assert!(files.contains(&"moments.csv".to_string()));
    let (header, rows) = csv_rows(&out.join("trajectory.csv"));
    let r_col = header.iter().position(|h| h == "r").unwrap();
    let t0_col = header.iter().position(|h| h == "t0").unwrap();
    let last = rows.last().unwrap();
    assert!((last[r_col] - 2.0).abs() < 1e-6, "r = {}", last[r_col]);
    assert!((last[t0_col] - 4.0).abs() < 1e-6);
}

#[test]
fn constant_driving_traces_the_real_axis() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(
        todaflow(&scenario("loewner_constant"), &out, &["--format", "csv"])
            .status
            .code(),
        Some(0)
    );
    let (header, rows) = csv_rows(&out.join("trace.csv"));
    assert_eq!(header, ["q", "re_tip", "im_tip"]);
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r[2].abs() < 1e-8));
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    assert!((rows[0][1] - 1.0).abs() < 1e-9);
}

#[test]
fn plane_gas_support_has_radius_root_t0() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(todaflow(&scenario("circular_law"), &out, &[]).status.code(), Some(0));
    let support: Value = serde_json::from_slice(&fs::read(out.join("support.json")).unwrap()).unwrap();
    let r = support["fitted_map"]["r"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 0.03, "r = {r}");
}

#[test]
fn invalid_config_exits_one_with_pointer() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(&tmp, r#"{"dyson": {"N": 8, "hbar": -1}}"#);
    let result = todaflow(&config, &tmp.path().join("run"), &[]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("/dyson/hbar"), "{stderr}");
    assert!(!tmp.path().join("run").join("manifest.json").exists());
}

#[test]
fn missing_config_exits_one() {
    let tmp = TempDir::new().unwrap();
    let result = todaflow(&tmp.path().join("absent.json"), &tmp.path().join("run"), &[]);
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn shock_is_a_breakdown_with_partial_outputs() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        &tmp,
        r#"{"hydro": {"profile": {"table": {"t0": [-1, 0, 1], "q": [-1, 0, 1]}}, "speed": "burgers", "s": 1.5}}"#,
    );
    let out = tmp.path().join("run");
    let result = todaflow(&config, &out, &[]);
    assert_eq!(result.status.code(), Some(2));
    let m = manifest(&out);
    assert_eq!(m["status"], "breakdown");
    assert_eq!(m["complete"], false);
    assert_eq!(m["breakdown"]["kind"], "shock");
    let files = listed(&m);
    assert!(files.contains(&"initial.csv".to_string()));
    assert!(!files.contains(&"solution.csv".to_string()));
    assert!((m["diagnostics"]["s_star"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn manifest_lists_and_hashes_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(todaflow(&scenario("moments_ellipse"), &out, &[]).status.code(), Some(0));
    let m = manifest(&out);
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut names = listed(&m);
    names.sort();
    assert_eq!(names, on_disk);
    for f in m["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
}

#[test]
fn format_subset_and_seed_override() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(
        todaflow(&scenario("loewner_brownian"), &a, &["--format", "csv", "--seed", "3"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        todaflow(&scenario("loewner_brownian"), &b, &["--format", "csv", "--seed", "3"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        todaflow(&scenario("loewner_brownian"), &c, &["--format", "csv", "--seed", "4"])
            .status
            .code(),
        Some(0)
    );
    let m = manifest(&a);
    assert_eq!(m["seed"], 3);
    assert_eq!(m["formats"], serde_json::json!(["csv"]));
    assert!(listed(&m).iter().all(|n| n.ends_with(".csv")));
    assert_eq!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(b.join("trace.csv")).unwrap()
    );
    assert_ne!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(c.join("trace.csv")).unwrap()
    );
}

#[test]
fn unknown_format_is_rejected_by_the_parser() {
    let tmp = TempDir::new().unwrap();
    let result = todaflow(&scenario("circle_law"), &tmp.path().join("run"), &["--format", "png"]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!tmp.path().join("run").exists());
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_freqgate");

fn freqgate(args: &[&str], root: &Path) -> Output {
    Command::new(BIN).args(args).env("FREQGATE_OUT", root).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Parses `name.csv` into a header and rows of cells.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

const QUICK_DESIGN: &str = r#"{"scenario": "design", "optimizer": {"restarts": 4}}"#;

#[test]
fn hadamard_defaults_meet_fidelity_floor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let run = freqgate(&["design", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let result = read_json(&out.join("design_result.json"));
    assert!(result["fidelity"].as_f64().unwrap() >= 0.9999 - 1e-9);
    assert_eq!(result["converged"], Value::Bool(true));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["scenario"], "design");
    assert_eq!(manifest["converged"], Value::Bool(true));
}

#[test]
fn reruns_reproduce_every_result_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "design.json", QUICK_DESIGN);
    let mut manifests = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(name);
        let run =
            freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads], dir.path());
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
        manifests.push(read_json(&out.join("manifest.json")));
    }
    assert_eq!(manifests[0]["files"], manifests[1]["files"]);
    assert_eq!(manifests[0]["config_sha256"], manifests[1]["config_sha256"]);
    for f in manifests[0]["files"].as_array().unwrap() {
        let name = f["name"].as_str().unwrap();
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn manifest_hashes_match_stored_and_input_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "design.json", QUICK_DESIGN);
    let out = dir.path().join("b");
    assert_eq!(code(&freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path())), 0);
    let manifest = read_json(&out.join("manifest.json"));
    let stored = fs::read(out.join("config.json")).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap(), sha256(&stored));
    assert_eq!(manifest["input_sha256"].as_str().unwrap(), sha256(QUICK_DESIGN.as_bytes()));
    for f in manifest["files"].as_array().unwrap() {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256(&bytes));
    }
    // the stored config parses back to the effective one
    let effective: Value = serde_json::from_slice(&stored).unwrap();
    assert_eq!(effective["optimizer"]["restarts"], 4);
    assert_eq!(effective["scenario"], "design");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "design.json", QUICK_DESIGN);
    let out = dir.path().join("b");
    let run = freqgate(&["design", "--config", &cfg, "--seed", "17", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0);
    assert_eq!(read_json(&out.join("manifest.json"))["seed"], 17);
    assert_eq!(read_json(&out.join("config.json"))["optimizer"]["master_seed"], 17);
    assert_eq!(read_json(&out.join("design_result.json"))["problem"]["master_seed"], 17);
}

#[test]
fn default_output_root_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = freqgate(&["bessel-check"], dir.path());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(dir.path().join("bessel-check-seed0").join("manifest.json").is_file());
}

#[test]
fn malformed_config_exits_2_without_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    for (i, text) in [
        "{ not json",
        r#"{"scenario": "teleport"}"#,
        r#"{"scenario": "design", "optimiser": {}}"#,
        r#"{"scenario": "design", "optimizer": {"restarts": 0}}"#,
        r#"{"scenario": "visibility"}"#,
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), text);
        let run = freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
        assert_eq!(code(&run), 2, "config {i}: {}", String::from_utf8_lossy(&run.stderr));
        assert!(!String::from_utf8_lossy(&run.stderr).is_empty());
    }
    let missing = dir.path().join("missing.json");
    let run = freqgate(&["design", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 2);
    assert!(!out.exists());
    // nothing staged was left behind either
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with('.')));
}

#[test]
fn unconverged_design_exits_3_with_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tight.json",
        r#"{"scenario": "design", "target": {"kind": "dft", "d": 3}, "optimizer": {"harmonics": 1, "restarts": 1, "iteration_budget": 5}}"#,
    );
    let out = dir.path().join("b");
    let run = freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 3);
    assert_eq!(read_json(&out.join("manifest.json"))["converged"], Value::Bool(false));
}

#[test]
fn unwritable_output_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("bundle");
    let run = freqgate(&["bessel-check", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 5);
}

#[test]
fn empty_or_missing_bundle_report_fails() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let run = freqgate(&["report", empty.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 6);
    assert!(String::from_utf8_lossy(&run.stderr).contains("manifest.json"));
    let run = freqgate(&["report", dir.path().join("absent").to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 6);
}

#[test]
fn report_lists_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "design.json", QUICK_DESIGN);
    let out = dir.path().join("b");
    assert_eq!(code(&freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path())), 0);
    fs::remove_file(out.join("spectra.csv")).unwrap();
    fs::remove_file(out.join("restarts.csv")).unwrap();
    let run = freqgate(&["report", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 6);
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("spectra.csv") && err.contains("restarts.csv"), "{err}");
}

#[test]
fn bound_check_table_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bound.json",
        r#"{"scenario": "bound-check", "bound": {"d_min": 2, "d_max": 5, "harmonics": [1, 4], "restarts": 3, "iteration_budget": 400}}"#,
    );
    let out = dir.path().join("b");
    let run = freqgate(&["bound-check", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let (header, rows) = read_csv(&out.join("bound.csv"));
    assert_eq!(header[..4], ["d", "scatter_bound", "ceiling", "best_single_eom_p"]);
    assert_eq!(rows.len(), 4);
    for (row, d) in rows.iter().zip(2..=5) {
        let x: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(x[0], d as f64);
        let bound = (d - 1) as f64 / (2 * d - 1) as f64;
        assert!((x[1] - bound).abs() < 1e-8);
        assert!((x[2] - (1.0 - bound)).abs() < 1e-8);
        assert!(x[3] > 0.0 && x[3] <= x[2] + 1e-6, "d = {d}: {} above ceiling {}", x[3], x[2]);
    }
}

#[test]
fn tritter_spectra_show_three_equal_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tritter.json",
        r#"{"scenario": "design", "target": {"kind": "dft", "d": 3}, "optimizer": {"restarts": 30}}"#,
    );
    let out = dir.path().join("b");
    let run = freqgate(&["design", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let report = freqgate(&["report", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&report), 0);
    let (header, rows) = read_csv(&out.join("report").join("spectra.csv"));
    assert_eq!(header, ["input", "mode", "relative_mode", "power"]);
    let success = read_json(&out.join("design_result.json"))["success_probability"].as_f64().unwrap();
    assert!((success - 0.9733).abs() < 1e-4, "{success}");
    let mut in_window = 0.0;
    for input in 0..3 {
        let lines: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == input.to_string() && (0..3).any(|m| r[2] == m.to_string()))
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        // F = 0.9999 leaves room for a few percent of amplitude imbalance
        let mean = lines.iter().sum::<f64>() / 3.0;
        for p in &lines {
            assert!((p / mean - 1.0).abs() < 0.03, "input {input}: {lines:?}");
        }
        in_window += lines.iter().sum::<f64>() / 3.0;
    }
    // spectra are rounded to 9 digits
    assert!((in_window - success).abs() < 1e-7, "{in_window} vs {success}");
}

#[test]
fn report_places_reference_values_beside_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "char.json",
        r#"{"scenario": "characterize", "apparatus": {"osa_noise_sigma": 0.005, "repeats": 3}}"#,
    );
    let out = dir.path().join("b");
    let run = freqgate(&["characterize", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let report_dir = dir.path().join("report");
    let run = freqgate(&["report", out.to_str().unwrap(), "--out", report_dir.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 0);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("measured_fidelity") && stdout.contains("0.99998"), "{stdout}");
    let (header, rows) = read_csv(&report_dir.join("comparison.csv"));
    assert_eq!(header, ["quantity", "simulated", "reference", "uncertainty", "relation", "agrees", "source"]);
    let row = rows.iter().find(|r| r[0] == "measured_fidelity").unwrap();
    assert_eq!(row[2..5], ["0.99998", "0.00003", "value"]);
    for name in ["fringes.csv", "osa_spectra.csv", "spectra.csv"] {
        assert!(report_dir.join(name).is_file(), "{name}");
    }
}

#[test]
fn scenario_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.json", r#"{"scenario": "bessel-check"}"#);
    let out = dir.path().join("b");
    let run = freqgate(&["scaling", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(code(&run), 2);
    assert!(!out.exists());
}

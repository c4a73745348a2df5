//! End-to-end checks of the binary: flags, exit codes, cache behavior and
//! file outputs.

use std::path::Path;
use std::process::Command;

fn spinekit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinekit"))
}

#[test]
fn spine_summary_fields() {
    let out = spinekit()
        .args(["spine", "--L", "2", "--M", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("6 blades across 5 momentum sectors"));
    assert!(text.contains("\"sector_count\": 5"));
}

#[test]
fn spine_single_particle_has_one_sector() {
    let out = spinekit()
        .args(["spine", "--L", "2", "--M", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("1 blades across 1 momentum sectors"));
}

#[test]
fn spine_large_configuration_counts() {
    let out = spinekit()
        .args(["spine", "--L", "4", "--M", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4845 blades across 65 momentum sectors"));
}

#[test]
fn usage_errors_exit_2() {
    let out = spinekit().args(["spine", "--L", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = spinekit()
        .args(["check", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn odd_charge_is_rejected() {
    let out = spinekit()
        .args(["spine", "--L", "3", "--M", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("even"));
}

#[test]
fn tables_idempotent_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();

    let first = spinekit()
        .args(["tables", "--L", "2", "--M", "2", "--kind", "pair", "--cache-dir", cache])
        .output()
        .unwrap();
    assert!(first.status.success());
    assert!(String::from_utf8(first.stdout).unwrap().contains("wrote"));

    let second = spinekit()
        .args(["tables", "--L", "2", "--M", "2", "--kind", "pair", "--cache-dir", cache])
        .output()
        .unwrap();
    assert!(second.status.success());
    assert!(String::from_utf8(second.stdout).unwrap().contains("cache hit"));

    // corrupt one digit: checksum failure, exit 4
    let path = Path::new(cache).join("pair_L2_M2.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"6\"", "\"7\"");
    std::fs::write(&path, text).unwrap();
    let third = spinekit()
        .args(["tables", "--L", "2", "--M", "2", "--kind", "pair", "--cache-dir", cache])
        .output()
        .unwrap();
    assert_eq!(third.status.code(), Some(4));
}

#[test]
fn tau_table_has_three_terms_for_2_2() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let out = spinekit()
        .args(["tables", "--L", "2", "--M", "2", "--kind", "tau", "--cache-dir", cache])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("3 entries"));
    let text = std::fs::read_to_string(Path::new(cache).join("tau_L2_M2.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["schema"], 1);
    assert_eq!(parsed["values"]["-2,2"], "1");
    assert_eq!(parsed["values"]["-1,1"], "-4");
    assert_eq!(parsed["values"]["0,0"], "3");
}

#[test]
fn curve_endpoints_grid_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r2.csv");
    let out = spinekit()
        .args([
            "curve", "--L", "2", "--M", "2", "--grid", "2", "--out",
            out_path.to_str().unwrap(), "--cache-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4); // header comment, column names, two rows
    assert!(lines[0].contains("normalization=1"));
    assert!(lines[2].starts_with("0.000000000000"));
    assert!(lines[3].starts_with("3.141592653590"));
}

#[test]
fn stretch_requires_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r2.csv");
    let out = spinekit()
        .args([
            "curve", "--L", "6", "--M", "5", "--grid", "16", "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--stretch-float"));
    assert!(!out_path.exists());
}

#[test]
fn cache_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = spinekit()
        .env("SPINEKIT_CACHE_DIR", dir.path())
        .args(["tables", "--L", "2", "--M", "2", "--kind", "pair"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("pair_L2_M2.json").exists());
}

#[test]
fn check_suite_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let out = spinekit()
        .args([
            "check", "--suite", "plucker", "--seed", "7", "--json",
            json_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report[0]["suite"], "plucker");
    assert_eq!(report[0]["ok"], true);
}

#[test]
fn check_hirota_seeded_report() {
    let out = spinekit()
        .args(["check", "--suite", "hirota", "--seed", "7"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed=7"));
    assert!(text.contains("suite hirota: pass"));
}

#[test]
fn bench_strategies_agree() {
    let out = spinekit()
        .args(["bench", "--L", "2", "--M", "3", "--seed", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut values = std::collections::HashSet::new();
    for line in text.lines().skip(1) {
        let value = line.rsplit(',').next().unwrap();
        values.insert(value.to_string());
    }
    assert_eq!(values.len(), 1, "{text}");
    // pruned peak never exceeds naive peak
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let naive: usize = rows[0][3].parse().unwrap();
    let pruned: usize = rows[1][3].parse().unwrap();
    assert!(pruned <= naive);
}

#[test]
fn deterministic_outputs_under_fixed_seed() {
    let run = || {
        let out = spinekit()
            .args(["bench", "--L", "2", "--M", "2", "--seed", "3", "--format", "json"])
            .output()
            .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["rows"][0]["value"].clone()
    };
    assert_eq!(run(), run());
}

use std::fs;
use std::process::{Command, Output};

use chiral_otto_core::analytic4;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral-otto")).args(args).env_remove("OTTO_LOG").output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header and data rows of a CSV document, metadata lines dropped.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv(text);
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn spectrum_matches_closed_form() {
    let text = stdout(&["spectrum", "--n", "4", "--b-field", "0.7", "--e-field", "2.5"]);
    let mut got = column(&text, "energy");
    let mut want = analytic4::spectrum4(1.0, 0.7, 2.5).to_vec();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert_eq!(got.len(), 16);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    assert_eq!(column(&stdout(&["spectrum", "--n", "8"]), "energy").len(), 256);
}

#[test]
fn csv_has_metadata_and_full_precision() {
    let text = stdout(&["spectrum", "--n", "3"]);
    assert!(text.starts_with("# "));
    assert!(text.lines().any(|l| l == "# command=spectrum"));
    let (header, rows) = csv(&text);
    assert_eq!(header, ["level", "energy", "sz"]);
    let mantissa = rows[0][1].split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.len(), 18);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let args = ["tangles", "--sweep", "t:0.5:40:23", "--sweep", "e-field:0:6:4", "--jobs"];
    let one = run(&[&args[..], &["1"]].concat());
    let four = run(&[&args[..], &["4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let (_, rows) = csv(&String::from_utf8(one.stdout).unwrap());
    assert_eq!(rows.len(), 23 * 4);
    // The last sweep varies fastest.
    assert_eq!(rows[0][0], rows[1][0]);
    assert_ne!(rows[0][1], rows[1][1]);
}

#[test]
fn json_document_has_meta_and_rows() {
    let text = stdout(&["susceptibility", "--format", "json", "--sweep", "t:1:5:5"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    let doc = v.as_object().unwrap();
    assert_eq!(doc.keys().collect::<Vec<_>>(), ["meta", "rows"]);
    assert_eq!(v["meta"]["command"], "susceptibility");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4]["t"], 5.0);
    assert!(rows.iter().all(|r| r["chi_b"].as_f64().unwrap() > 0.0));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 3\nb-field = 2.0\nformat = \"json\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v: Value = serde_json::from_str(&stdout(&["spectrum", "--config", cfg, "--b-field", "0.5"])).unwrap();
    assert_eq!(v["meta"]["n"], 3);
    assert_eq!(v["meta"]["b-field"], 0.5);
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);

    let out = dir.path().join("spectrum.csv");
    let direct = stdout(&["spectrum", "--n", "3", "--b-field", "0.5"]);
    stdout(&["spectrum", "--config", cfg, "--b-field", "0.5", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(fs::read_to_string(&out).unwrap(), direct);

    fs::write(dir.path().join("bad.toml"), "spin = 3\n").unwrap();
    let bad = dir.path().join("bad.toml");
    assert_eq!(run(&["spectrum", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn parameter_errors_exit_with_two() {
    for args in [
        &["spectrum", "--no-such-flag"][..],
        &["spectrum", "--n", "20"],
        &["tangles", "--t", "0"],
        &["tangles", "--t", "-1"],
        &["otto", "--t-hot", "5", "--t-cold", "10"],
        &["spectrum", "--sweep", "t:1:2"],
        &["spectrum", "--jobs", "0"],
        &["semiclassical", "--n", "5"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn perturbed_validation_exits_with_three() {
    let out = run(&["validate", "--perturb-energy", "1e-3"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = csv(&text);
    let passed = header.iter().position(|h| h == "passed").unwrap();
    let closed = rows.iter().find(|r| r[0] == "closed_form_spectrum").unwrap();
    assert_eq!(closed[passed], "false");
}

#[test]
fn tangles_limits() {
    let zero = stdout(&["tangles", "--e-field", "0", "--sweep", "t:0.5:20:8"]);
    assert!(column(&zero, "chirality").iter().all(|&c| c == 0.0));
    let hot = stdout(&["tangles", "--t", "1e4"]);
    assert!((column(&hot, "tau1")[0] - 1.0).abs() < 1e-3);
}

#[test]
fn otto_table() {
    let text = stdout(&["otto", "--sweep", "e-field:3.5:20:12"]);
    assert!(column(&text, "carnot").iter().all(|&c| (c - 2.0 / 3.0).abs() < 1e-15));
    let eta = column(&text, "eta");
    assert!(eta[0].abs() < 1e-12, "equal fields do no work: {}", eta[0]);
    let (header, rows) = csv(&text);
    let status = header.iter().position(|h| h == "status").unwrap();
    assert!(rows.iter().all(|r| r[status] == "ok"));
}

#[test]
fn semiclassical_high_temperature_entropy() {
    let text = stdout(&["semiclassical", "--e-field", "0", "--b-field", "0", "--t", "1e4"]);
    let s = column(&text, "entropy_sc")[0];
    assert!((s - 16f64.ln()).abs() < 1e-6, "{s}");
}

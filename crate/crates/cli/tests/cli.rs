use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn superres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superres")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header and numeric rows of a CSV table, skipping metadata lines.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv(text);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn digits15(x: f64) -> String {
    format!("{x:.14e}")
}

#[test]
fn csv_and_json_agree_to_fifteen_digits() {
    let args = ["qfi-scan", "--start", "1e-3", "--stop", "9", "--points", "17", "--strengths", "0.2,3"];
    let text = stdout(&superres(&args));
    let json: Value = serde_json::from_str(&stdout(&superres(&[&["--format", "json"], &args[..]].concat()))).unwrap();
    let (header, rows) = csv(&text);
    let cols: Vec<String> = json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().into()).collect();
    assert_eq!(header, cols);
    let jrows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, j) in rows.iter().zip(jrows) {
        for (cell, v) in r.iter().zip(j.as_array().unwrap()) {
            let a: f64 = cell.parse().unwrap();
            assert_eq!(digits15(a), digits15(v.as_f64().unwrap()));
            assert_eq!(a, v.as_f64().unwrap());
        }
    }
    assert_eq!(json["metadata"]["command"], "qfi-scan");
}

#[test]
fn normalized_qfi_tends_to_one() {
    let text = stdout(&superres(&["qfi-scan", "--start", "1e-7", "--stop", "1e-3", "--points", "3", "--log", "--strengths", "0.01,1,5"]));
    for v in column(&text, "f22_normalized").into_iter().chain(column(&text, "f11_normalized")) {
        assert!((v - 1.0).abs() < 1e-5, "{v}");
    }
}

#[test]
fn vacuum_is_most_likely_at_full_period() {
    let text = stdout(&superres(&["pmn-scan", "--start", "5.8", "--stop", "6.8", "--points", "41", "--m-max", "1", "--n-max", "1"]));
    let dphi = column(&text, "dphi");
    let p11 = column(&text, "p_1_0");
    let i = (0..p11.len()).min_by(|&a, &b| p11[a].total_cmp(&p11[b])).unwrap();
    assert!((dphi[i] - 2.0 * std::f64::consts::PI).abs() < 0.03, "min at {}", dphi[i]);
}

#[test]
fn sampling_is_reproducible() {
    let args = ["--seed", "11", "sample", "--dphi", "1", "--c", "0.3", "--samples", "20000"];
    let strip = |s: String| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let a = strip(stdout(&superres(&args)));
    let b = strip(stdout(&superres(&[&["--threads", "1"], &args[..]].concat())));
    assert_eq!(a, b);
    let c = strip(stdout(&superres(&["--seed", "12", "sample", "--dphi", "1", "--c", "0.3", "--samples", "20000"])));
    assert_ne!(a, c);
}

#[test]
fn output_file_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"strengths": [0.5], "range": {"start": 0.5, "stop": 1.5, "points": 3}}"#).unwrap();
    let out = dir.path().join("out.csv");
    let status = superres(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "qfi-scan", "--points", "5"]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let dphi = column(&text, "dphi");
    assert_eq!(dphi.len(), 5);
    assert_eq!((dphi[0], dphi[4]), (0.5, 1.5));
    assert!(column(&text, "strength").iter().all(|&s| s == 0.5));
}

#[test]
fn dirty_beam_writes_image() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("beam.pgm");
    let text = stdout(&superres(&["dirty-beam", "--grid", "64", "--half-width", "8", "--pgm", pgm.to_str().unwrap()]));
    assert!(text.contains("first_null"));
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5"));
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&superres(&["no-such-command"])), 2);
    assert_eq!(code(&superres(&["qfi-scan", "--points", "1"])), 2);
    assert_eq!(code(&superres(&["qfi-scan", "--strengths", "-1"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    assert_eq!(code(&superres(&["--config", cfg.to_str().unwrap(), "qfi-scan"])), 2);
    assert_eq!(code(&superres(&["--config", Path::new("/nonexistent/x.json").to_str().unwrap(), "qfi-scan"])), 2);
    let forced = superres(&[
        "misalignment-scan", "--start", "1e-3", "--stop", "1e-2", "--points", "2", "--radial-nodes", "8", "--phase-nodes", "8",
    ]);
    assert_eq!(code(&forced), 3, "stderr: {}", String::from_utf8_lossy(&forced.stderr));
}

#[test]
fn multi_scene_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("multi.json");
    std::fs::write(
        &cfg,
        r#"{"multi": {"sources": [{"x": 1e-3, "y": 0.0, "n": 0.02}, {"x": -1e-3, "y": 0.0, "n": 0.02}],
            "detectors": [{"u": 0.0, "v": 0.0}, {"u": 10.0, "v": 0.0}],
            "eta": [[0.5, 0.5], [0.5, 0.5]], "k": 1256.6, "s0": 1.0e4},
            "params": ["x0", "y1"]}"#,
    )
    .unwrap();
    let text = stdout(&superres(&["--config", cfg.to_str().unwrap(), "multi-qfi"]));
    let q = column(&text, "qfi");
    assert_eq!(q.len(), 4);
    assert!(q[0] > 0.0);
    assert_eq!(q[3], 0.0);
}

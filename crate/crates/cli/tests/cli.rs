use std::path::Path;
use std::process::{Command, Output};

fn chshlab(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chshlab"))
        .args(args)
        .env("CHSHLAB_CACHE_DIR", cache)
        .output()
        .expect("run chshlab")
}

fn body(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fig4", "--samples", "3000", "--bins", "8", "--seed", "11"];
    let (a, b) = (chshlab(&args, dir.path()), chshlab(&args, dir.path()));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
    let c = chshlab(
        &["fig4", "--samples", "3000", "--bins", "8", "--seed", "12"],
        dir.path(),
    );
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_has_preamble_header_and_finite_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = chshlab(&["fig1", "--grid", "361"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    for key in ["# seed: 0", "# samples: ", "# version: "] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{key}");
    }
    let rows = body(&out);
    assert_eq!(rows[0], ["theta", "b", "m2_state", "m2_power"]);
    assert_eq!(rows.len(), 362);
    for row in &rows[1..] {
        for cell in row {
            assert!(cell.parse::<f64>().unwrap().is_finite());
        }
    }
    let peak = &rows[91];
    assert!((peak[1].parse::<f64>().unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn json_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.json");
    let out = chshlab(
        &[
            "fig3",
            "--grid",
            "11",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["name"], "fig3");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 11);
    assert_eq!(doc["verified"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(chshlab(&["nonsense"], dir.path()).status.code(), Some(64));
    assert_eq!(
        chshlab(&["fig1", "--samples", "0"], dir.path())
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        chshlab(&["fig1", "--core", "w:abc"], dir.path())
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        chshlab(&["fig1", "--log-base", "10"], dir.path())
            .status
            .code(),
        Some(64)
    );
    assert_eq!(chshlab(&["--help"], dir.path()).status.code(), Some(0));
    let bad = dir.path().join("missing").join("out.csv");
    let out = chshlab(
        &["fig1", "--grid", "3", "--out", bad.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        chshlab(&["verify", "--samples", "2000", "--grid", "19"], dir.path())
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn exact_reports_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = chshlab(&["exact", "--samples", "10000"], dir.path());
    assert!(out.status.success());
    let rows = body(&out);
    let value = |q: &str| {
        rows.iter().find(|r| r[0] == q).unwrap()[1]
            .parse::<f64>()
            .unwrap()
    };
    assert!((value("pviol") - (10.0 - 7.0 * std::f64::consts::SQRT_2) / 4.0).abs() < 1e-15);
    assert!((value("var") - 0.8).abs() < 1e-10);
    assert_eq!(value("chebyshev"), 0.2);
}

#[test]
fn table2_has_pass_column_and_group_filter() {
    let dir = tempfile::tempdir().unwrap();
    let out = chshlab(
        &[
            "table2",
            "--samples",
            "2000",
            "--core",
            "w:pi/4",
            "--group",
            "cb",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = body(&out);
    let pass = rows[0].iter().position(|c| c == "pass").unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], "C_B");
    assert_eq!(rows[1][5], "4");
    assert_eq!(rows[1][pass], "true");
    assert_eq!(rows[2][1], "M2");
}

#[test]
fn enumerate_writes_cache_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = chshlab(&["enumerate"], dir.path());
    assert!(out.status.success());
    let file = dir.path().join("clifford2_v1.bin");
    let first = std::fs::read(&file).unwrap();
    assert!(chshlab(&["enumerate"], dir.path()).status.success());
    assert_eq!(std::fs::read(&file).unwrap(), first);
    std::fs::write(&file, b"garbage").unwrap();
    assert!(chshlab(&["enumerate"], dir.path()).status.success());
    assert_eq!(std::fs::read(&file).unwrap(), first);
}

use std::path::{Path, PathBuf};
use std::process::Command;

use nhvol::cli::{main_with_args, run, Cli};

use clap::Parser;

fn systems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("systems")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn capture(args: &[&str]) -> (i32, String, String) {
    let cli = Cli::try_parse_from(args).expect("arguments parse");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn check_golden(name: &str, text: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with UPDATE_GOLDEN=1", path.display()));
    assert!(want == text, "{name} differs from the golden copy; rerun with UPDATE_GOLDEN=1 after review");
}

const AUDITS: &[(&str, i32)] = &[
    ("vertical_disk", 0),
    ("falling_disk", 0),
    ("rolling_ball", 0),
    ("heisenberg", 0),
    ("roller_racer", 1),
    ("chaplygin_sphere", 0),
    ("sleigh_oscillator", 1),
    ("mobius", 0),
    ("chaplygin_sleigh", 1),
    ("chaplygin_sleigh_a0", 0),
];

#[test]
fn audit_reports_match_golden() {
    for (name, code) in AUDITS {
        let file = systems().join(format!("{name}.json"));
        let (got, out, err) = capture(&["nhvol", "audit", file.to_str().unwrap(), "--out", "-"]);
        assert_eq!(got, *code, "{name}: {err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], "1.0");
        assert_eq!(v["exit_code"], *code);
        check_golden(&format!("{name}.audit.json"), &out);
    }
}

#[test]
fn audit_is_reproducible() {
    let file = systems().join("falling_disk.json");
    let args = ["nhvol", "audit", file.to_str().unwrap(), "--out", "-", "--seed", "7"];
    let a = capture(&args).1;
    let b = capture(&args).1;
    assert_eq!(a, b);
    let c = capture(&["nhvol", "audit", file.to_str().unwrap(), "--out", "-", "--seed", "8"]).1;
    assert_ne!(a, c);
}

#[test]
fn eps_reports_match_golden() {
    for (name, code) in [("eps_sleigh", 1), ("eps_so3", 0), ("eps_abelian", 0)] {
        let file = systems().join(format!("{name}.json"));
        let (got, out, err) = capture(&["nhvol", "eps", file.to_str().unwrap(), "--out", "-"]);
        assert_eq!(got, code, "{name}: {err}");
        check_golden(&format!("{name}.eps.json"), &out);
    }
}

#[test]
fn basis_flag() {
    let file = systems().join("sleigh_oscillator.json");
    let f = file.to_str().unwrap();
    let (_, none, _) = capture(&["nhvol", "audit", f, "--out", "-", "--basis", "none"]);
    let v: serde_json::Value = serde_json::from_str(&none).unwrap();
    assert_eq!(v["verdict"]["status"], "NOT_CLOSED_NO_ANSATZ");
    let (_, custom, _) = capture(&["nhvol", "audit", f, "--out", "-", "--basis", "custom:1,r^2"]);
    let v: serde_json::Value = serde_json::from_str(&custom).unwrap();
    assert_eq!(v["verdict"]["status"], "INCONSISTENT_ON_ANSATZ");
    let (code, _, err) = capture(&["nhvol", "audit", f, "--basis", "fourier"]);
    assert_eq!(code, 2);
    assert!(err.contains("fourier"), "{err}");
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let file = systems().join("chaplygin_sleigh.json");
    let (code, out, err) = capture(&[
        "nhvol",
        "simulate",
        file.to_str().unwrap(),
        "--T",
        "1",
        "--h",
        "0.01",
        "--init",
        "q=0,0,0;v=1,0,0.5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("energy drift"));
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 1 + 3 + 3 + 3);
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 101);
    let t_end: f64 = rows[100][0].parse().unwrap();
    assert!((t_end - 1.0).abs() < 1e-12);
}

#[test]
fn verify_separates_densities() {
    let file = systems().join("falling_disk.json");
    let f = file.to_str().unwrap();
    let base = ["nhvol", "verify", f, "--T", "1", "--samples", "12"];
    let with: Vec<&str> = base.iter().copied().chain(["--density", "1/(J + m*R^2*sin(theta)^2)"]).collect();
    assert_eq!(capture(&with).0, 0);
    assert_eq!(capture(&base).0, 1);
}

#[test]
fn errors_exit_two() {
    let (code, _, err) = capture(&["nhvol", "audit", "/nonexistent/system.json"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name":"bad","coordinates":["x"],"metric":[["1 +"]],"constraints":[]}"#).unwrap();
    assert_eq!(capture(&["nhvol", "audit", bad.to_str().unwrap()]).0, 2);
    assert_eq!(main_with_args(["nhvol", "audit", "--samples", "many", "x.json"]), 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nhvol");
    let run = |name: &str| {
        Command::new(bin)
            .args(["audit", systems().join(name).to_str().unwrap()])
            .output()
            .unwrap()
    };
    let ok = run("mobius.json");
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("EXACT_NO_MULTIPLIER"));
    assert_eq!(run("roller_racer.json").status.code(), Some(1));
    assert_eq!(run("missing.json").status.code(), Some(2));
}

/// The shipped report schema lists every key the reports actually carry as
/// required, and the reports carry all of them.
#[test]
fn golden_reports_follow_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let required = |v: &serde_json::Value| -> Vec<String> {
        v["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
    };
    let defs = &schema["$defs"];
    for entry in std::fs::read_dir(golden_dir()).unwrap() {
        let path = entry.unwrap().path();
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let command = report["command"].as_str().unwrap().to_string();
        let mut checks = vec![("$".to_string(), &schema, &report), (command.clone(), &defs[&command], &report)];
        if command == "audit" {
            checks.push(("verdict".into(), &defs["verdict"], &report["verdict"]));
            checks.push(("rate_audit".into(), &defs["rate_audit"], &report["rate_audit"]));
        }
        for (at, s, v) in checks {
            for key in required(s) {
                assert!(v.get(&key).is_some(), "{}: {at}.{key} missing", path.display());
            }
        }
        let top: Vec<String> = required(&schema).into_iter().chain(required(&defs[&command])).collect();
        for key in report.as_object().unwrap().keys() {
            assert!(top.contains(key), "{}: {key} not in the schema", path.display());
        }
    }
}

#[test]
fn zero_velocity_is_stationary() {
    let file = systems().join("rolling_ball.json");
    let (code, out, err) = capture(&[
        "nhvol",
        "simulate",
        file.to_str().unwrap(),
        "--T",
        "2",
        "--h",
        "0.01",
        "--init",
        "q=0.1,0.2,0.3,0.4,0.5;v=0,0,0,0,0",
        "--out",
        "-",
    ]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 201);
    let first: Vec<f64> = rows[0].iter().skip(1).take(5).map(|x| x.parse().unwrap()).collect();
    for row in &rows {
        let q: Vec<f64> = row.iter().skip(1).take(5).map(|x| x.parse().unwrap()).collect();
        assert_eq!(q, first);
    }
}

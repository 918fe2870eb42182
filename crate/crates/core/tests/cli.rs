use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gaussian-gabor"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn last_column_value(csv: &str, column: &str) -> f64 {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.last().unwrap().split(',').nth(idx).unwrap().parse().unwrap()
}

#[test]
fn density_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["density", "--set", "axes", "--r", "10,20,40"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert!(csv.starts_with("r,theta,vartheta,count,density\n"));
    assert!((last_column_value(&csv, "density") - 0.6366).abs() < 1e-3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "density");
    assert_eq!(manifest["config"]["format"], "csv");
}

#[test]
fn envelope_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["envelope", "--dirs", "0,1.5707963,3.1415927,4.7123890", "--integrate"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("envelope_integral.csv")).unwrap();
    assert!((last_column_value(&csv, "integral") - 6.2832).abs() < 1e-4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let none = Command::new(env!("CARGO_BIN_EXE_gaussian-gabor")).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&none.stderr).contains("Usage"));
    assert_eq!(run(&["points", "--set", "pentagon", "--radius", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["count", "--r", "3", "--theta", "1", "--vartheta", "1"], dir.path()).status.code(), Some(2));
    let numerical = run(&["jensen", "--func", "monomial:1", "--r", "1"], dir.path());
    assert_eq!(numerical.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&numerical.stderr).contains("F(0)"));
    let singular = run(&["biorth", "--set", "explicit", "--points", "1:0,1.000000001:0", "--radius", "3"], dir.path());
    assert_eq!(singular.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&singular.stderr).contains("regularization"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let cases: &[&[&str]] = &[
        &["level-check", "--random", "20", "--seed", "11"],
        &["growth-scan", "--r", "5,10", "--thetas", "64", "--format", "json"],
        &["fock-probe", "--func", "quot(s;1:0)", "--r", "2,3,4,5"],
        &["indicator", "--func", "prod(s;expq:0.1:0)", "--thetas", "64", "--r", "5,6,7,8"],
    ];
    for args in cases {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run(args, a.path()).status.success(), "{args:?}");
        assert!(run(args, b.path()).status.success());
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in names {
            if n == "run.json" {
                continue;
            }
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
        }
    }
}

#[test]
fn seeds_change_random_sweeps() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&["level-check", "--random", "5", "--seed", "1"], a.path());
    run(&["level-check", "--random", "5", "--seed", "2"], b.path());
    assert_ne!(
        fs::read(a.path().join("level_check.csv")).unwrap(),
        fs::read(b.path().join("level_check.csv")).unwrap()
    );
}

#[test]
fn profile_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["indicator", "--func", "s"], dir.path()).status.success());
    let profile = dir.path().join("indicator.csv");
    let o = run(&["levin", "--profile", profile.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let d = last_column_value(&fs::read_to_string(dir.path().join("levin.csv")).unwrap(), "density");
    assert!((d - 2.0 / std::f64::consts::PI).abs() < 0.02 * 2.0 / std::f64::consts::PI);
    let o = run(&["convexity", "--profile", profile.to_str().unwrap(), "--format", "json"], dir.path());
    assert!(o.status.success());
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("convexity.json")).unwrap()).unwrap();
    assert!(rep["min_margin"].as_f64().unwrap() >= -0.05);
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["points", "--set", "lattice:1:1", "--radius", "1.5"],
        &["count", "--r", "3", "--vartheta", "1.5707963267948966"],
        &["density", "--set", "lattice:1:1", "--r", "5,10,20"],
        &["invsq", "--r", "10"],
        &["eval-s", "--z", "0.5:0.5,-2:1"],
        &["mlf", "--z", "1,-10,3:3"],
        &["growth-scan", "--r", "5", "--thetas", "64"],
        &["shift", "--x", "-1", "--y", "0.5", "--t", "-1,0,1"],
        &["inner", "--lambda", "1:0", "--mu", "0:0"],
        &["gram", "--radius", "1.5", "--dump-matrix"],
        &["biorth", "--radius", "1.5"],
        &["complete", "--target", "monomial:1", "--r", "1.5,3,5"],
        &["bargmann", "--target", "shifted:1:-1", "--z", "0:0,1:1"],
        &["fock-norm", "--func", "one", "--radius", "2"],
        &["fock-probe", "--func", "one", "--r", "2,4,6,8"],
        &["growth-check", "--func", "quot(s;1:0)", "--r", "5,10", "--thetas", "64"],
        &["indicator", "--func", "expq:1:0", "--thetas", "64", "--r", "5,10"],
        &["levin", "--func", "one", "--thetas", "64", "--r", "5,10"],
        &["jensen", "--func", "s", "--r", "1.2"],
        &["envelope", "--dirs", "0,1,2,3,4,5", "--theta", "0.5"],
        &["level-check", "--dirs", "0,1.5,3,4.5,6"],
        &["convexity", "--func", "s", "--thetas", "64", "--r", "5,6,7,8"],
    ];
    assert_eq!(cases.len(), gaussian_gabor::cli::SUBCOMMANDS.len());
    for args in cases {
        let o = run(args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

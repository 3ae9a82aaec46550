use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use legendre_lab::commands::parse_gaussian;
use legendre_core::betti::CmInt;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn lab(args: &[&str], out: &Path) -> (i32, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_legendre-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    let report = fs::read_to_string(out.join("report.json")).map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (status.code().unwrap(), report)
}

#[test]
fn malformed_family_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"name": "x", "points": [], "second": {"kind": "units", "units": []}, "extra": 1}"#).unwrap();
    let (code, rep) = lab(&["scan", "--family", bad.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(code, 1);
    assert_eq!(rep["error"]["code"], "FAMILY_PARSE");

    let missing = dir.path().join("missing.json");
    let (code, rep) = lab(&["torsion", "--family", missing.to_str().unwrap()], &dir.path().join("out2"));
    assert_eq!(code, 1);
    assert_eq!(rep["error"]["code"], "FAMILY_PARSE");
}

#[test]
fn bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = data("example1.json");
    let (code, rep) = lab(&["scan", "--family", f.to_str().unwrap(), "--prec", "32"], dir.path());
    assert_eq!(code, 1);
    assert_eq!(rep["error"]["code"], "CONFIG");
}

#[test]
fn stoll_finds_no_torsion() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = lab(&["stoll", "--orders", "8", "--torsion-bound", "32"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["detections"], 0);
    assert_eq!(rep["result"]["summary"], "no torsion detected");
}

#[test]
fn periods_at_the_square_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let (code, rep) = lab(&["periods", "--lambda", "-1"], dir.path());
    assert_eq!(code, 0);
    let tau = &rep["result"]["tau_reduced"];
    let re: f64 = tau["re"].as_str().unwrap().parse().unwrap();
    let im: f64 = tau["im"].as_str().unwrap().parse().unwrap();
    assert!(re.abs() < 1e-15 && (im - 1.0).abs() < 1e-15, "{tau}");
    let j: f64 = rep["result"]["j"]["re"].as_str().unwrap().parse().unwrap();
    assert!((j - 1728.0).abs() < 1e-9);
}

#[test]
fn unit_lattice_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let f = data("golden.json");
    let (code, rep) = lab(&["lattice", "--family", f.to_str().unwrap(), "--lambda", "1/2"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["second"]["basis"], serde_json::json!([[2, -2]]));
}

#[test]
fn gaussian_arguments() {
    assert_eq!(parse_gaussian("3"), Some(CmInt::int(3)));
    assert_eq!(parse_gaussian("1+2i"), Some(CmInt { re: 1, im: 2 }));
    assert_eq!(parse_gaussian("4-i"), Some(CmInt { re: 4, im: -1 }));
    assert_eq!(parse_gaussian("-2i"), Some(CmInt { re: 0, im: -2 }));
    assert_eq!(parse_gaussian("i"), Some(CmInt { re: 0, im: 1 }));
    assert_eq!(parse_gaussian("-1-i"), Some(CmInt { re: -1, im: -1 }));
    assert_eq!(parse_gaussian("x"), None);
}

#[test]
fn count_with_gaussian_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let f = data("example2.json");
    let (code, rep) = lab(&["count", "--family", f.to_str().unwrap(), "--a", "2,0", "--b", "1+i,0", "--disc", "1.5,0,0.3", "--grid", "32", "--T", "10"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["b"], "1+1i 0");
}

fn scan_files(out: &Path) -> (Vec<u8>, Vec<u8>) {
    (fs::read(out.join("report.json")).unwrap(), fs::read(out.join("locus.csv")).unwrap())
}

#[test]
fn scans_are_reproducible_across_workers_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let f = data("example1.json");
    let args = ["scan", "--family", f.to_str().unwrap(), "--amax", "3", "--bmax", "2", "--grid", "32"];
    let one = dir.path().join("one");
    let (code, rep) = lab(&args, &one);
    assert_eq!(code, 0, "{rep}");
    let base = scan_files(&one);

    let two = dir.path().join("two");
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "3"]);
    assert_eq!(lab(&with_workers, &two).0, 0);
    assert_eq!(scan_files(&two), base);

    let ckpts: Vec<_> = fs::read_dir(one.join("checkpoints")).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(ckpts.len() >= 3);
    for p in ckpts.iter().step_by(2) {
        fs::remove_file(p).unwrap();
    }
    fs::remove_file(one.join("report.json")).unwrap();
    let mut resume = args.to_vec();
    resume.push("--resume");
    assert_eq!(lab(&resume, &one).0, 0);
    assert_eq!(scan_files(&one), base);

    // Checkpoints from another configuration are refused.
    let mut other = resume.clone();
    other.extend(["--prec", "128"]);
    let (code, rep) = lab(&other, &one);
    assert_eq!(code, 1);
    assert_eq!(rep["error"]["code"], "RESUME");
}

proptest::proptest! {
    #[test]
    fn gaussian_formatting_round_trips(re in -50i64..50, im in -50i64..50) {
        let b = CmInt { re, im };
        proptest::prop_assert_eq!(parse_gaussian(&legendre_lab::report::fmt_cm(&b)), Some(b));
    }
}

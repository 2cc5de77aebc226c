use std::process::Command;

use blockmv::cli::{main_with, OFFSET_CSV_HEADER, PROFILE_ENV, RUN_CSV_HEADER};
use blockmv::roofline::ROOFLINE_CSV_HEADER;
use blockmv::tuner::SWEEP_CSV_HEADER;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("blockmv").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blockmv"));
    cmd.env_remove(PROFILE_ENV);
    cmd
}

fn write_profile(dir: &tempfile::TempDir, bw: f64) -> std::path::PathBuf {
    let path = dir.path().join("slow.profile");
    let text = format!("# test device\nsm_count=4\nsegment_bytes=128\nbw_copy={bw}\nbw_scale={bw}\nbw_add={bw}\nbw_triad={bw}\n");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_symv_passes_and_prints_counters() {
    let (code, out, _) = run(&["run", "--kernel", "symv", "--prec", "d", "--n", "300", "--nb", "32", "--q", "2", "--y", "2"]);
    assert_eq!(code, 0, "{out}");
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("PASS"));
    assert_eq!(lines.next().unwrap(), RUN_CSV_HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), RUN_CSV_HEADER.split(',').count());
    let guard = RUN_CSV_HEADER.split(',').position(|c| c == "guard_violations").unwrap();
    assert_eq!(row[guard], "0");
}

#[test]
fn run_is_deterministic() {
    let args = ["run", "--kernel", "hemv", "--prec", "z", "--n", "130", "--y", "4", "--seed", "9"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn run_multi_device_reports_each_device() {
    let (code, out, _) = run(&["run", "--kernel", "gemv", "--prec", "z", "--m", "200", "--n", "300", "--devices", "4"]);
    assert_eq!(code, 0, "{out}");
    let scopes: Vec<&str> = out.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scopes.len(), 5, "{out}");
    assert_eq!(scopes.last(), Some(&"merged"));
}

#[test]
fn run_offset_window() {
    let (code, out, err) = run(&["run", "--kernel", "gemv-t", "--prec", "c", "--m", "100", "--n", "90", "--row-off", "7", "--col-off", "3"]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.starts_with("PASS"));
}

#[test]
fn roofline_with_custom_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_profile(&dir, 100.0);
    let (code, out, _) = run(&["roofline", "--profile", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some(ROOFLINE_CSV_HEADER));
    let s_gemv: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&s_gemv[..2], &["S", "GEMV"]);
    assert_eq!(s_gemv[6].parse::<f64>().unwrap(), 50.0);
    assert!(!out.contains("338.90 differs"), "custom profiles carry no reference note");
}

#[test]
fn profile_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_profile(&dir, 100.0);
    let out = bin().args(["roofline"]).env(PROFILE_ENV, &path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",50,"), "{text}");

    let out = bin().args(["roofline"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",87.62,"), "{text}");
}

#[test]
fn bad_profile_is_an_error_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.profile");
    std::fs::write(&path, "sm_count=4\nbw_copy=fast\n").unwrap();
    let (code, _, err) = run(&["roofline", "--profile", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.profile:2:"), "{err}");
}

#[test]
fn csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let (code, _, _) = run(&["offset-scan", "--prec", "s", "--n", "256", "--to", "40", "--csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(OFFSET_CSV_HEADER));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 41);
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[32][2], "1");
    assert!(rows[1][2].parse::<f64>().unwrap() > 1.5);
    // widened to the whole 256 x 256 parent: 256 columns of 8 segments
    for r in &rows[1..32] {
        assert_eq!(r[4], "2048");
    }
}

#[test]
fn tune_reports_coarse_and_fine() {
    let (code, out, err) = run(&["tune", "--kernel", "symv", "--prec", "d", "--sizes", "1024,2048,4096"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with(SWEEP_CSV_HEADER));
    assert!(out.contains("# coarse_best="));
    assert!(out.contains("# recommendation="));
    let rows = out.lines().filter(|l| l.starts_with("symv,D,")).count();
    assert!(rows > 15, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("# best_at_")).count(), 3);
}

#[test]
fn usage_errors() {
    let (code, _, err) = run(&["run", "--kernel", "gemv"]);
    assert_ne!(code, 0);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&["run", "--kernel", "gemv", "--prec", "s", "--nb", "33"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    let (code, _, _) = run(&["offset-scan", "--prec", "d", "--n", "64", "--to", "64"]);
    assert_eq!(code, 2);
    let out = bin().args(["bogus"]).output().unwrap();
    assert!(!out.status.success());
}

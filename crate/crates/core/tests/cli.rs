use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dajc::stream::{load_pgm, save_pgm};

fn dajc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dajc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "data", "corpus", &format!("{name}.pgm")].iter().collect()
}

/// Small crop so the tests stay fast.
fn small_image(dir: &Path) -> PathBuf {
    let frame = load_pgm(corpus("camera")).unwrap().crop(64, 48);
    let path = dir.join("small.pgm");
    save_pgm(&frame, &path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let stream = dir.path().join("a.dajc");
    let out = dajc(&["encode", s(&img), "-o", s(&stream), "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("significant_fraction="));
    assert!(dir.path().join("a.dajc.manifest.json").exists());

    let decoded = dir.path().join("a.pgm");
    let out = dajc(&["decode", s(&stream), "-o", s(&decoded), "--ref", s(&img)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("psnr_db,ssim"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row[0] >= 25.0, "PSNR {}", row[0]);
    assert!(row[1] > 0.0 && row[1] <= 1.0);
    assert_eq!(load_pgm(&decoded).unwrap().width, 64);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.pgm.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "decode");
}

#[test]
fn encoding_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let (a, b) = (dir.path().join("a.dajc"), dir.path().join("b.dajc"));
    assert_eq!(dajc(&["encode", s(&img), "-o", s(&a), "--seed", "9"]).status.code(), Some(0));
    assert_eq!(dajc(&["encode", s(&img), "-o", s(&b), "--seed", "9"]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn zero_threshold_converts_everything() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let out = dajc(&["encode", s(&img), "-o", s(&dir.path().join("z.dajc")), "--thresh-mv", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("significant_fraction=1.000000"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.dajc");

    let missing = dajc(&["encode", s(&dir.path().join("nope.pgm")), "-o", s(&out_path)]);
    assert_eq!(missing.status.code(), Some(1));

    let bad = dir.path().join("bad.dajc");
    std::fs::write(&bad, b"JUNKJUNKJUNKJUNKJUNK").unwrap();
    assert_eq!(dajc(&["decode", s(&bad), "-o", s(&dir.path().join("o.pgm"))]).status.code(), Some(2));

    let not_pgm = dir.path().join("p2.pgm");
    std::fs::write(&not_pgm, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
    assert_eq!(dajc(&["encode", s(&not_pgm), "-o", s(&out_path)]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"v_thresh": 3}"#).unwrap();
    let img = small_image(dir.path());
    assert_eq!(dajc(&["encode", s(&img), "-o", s(&out_path), "--config", s(&cfg)]).status.code(), Some(3));

    assert_eq!(dajc(&["encode"]).status.code(), Some(3));

    let threads = Command::new(env!("CARGO_BIN_EXE_dajc"))
        .args(["encode", s(&img), "-o", s(&out_path)])
        .env("DAJC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(3));
}

#[test]
fn calibrate_without_mismatch_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let calib = dir.path().join("calib.json");
    let out = dajc(&["calibrate", "-o", s(&calib), "--mismatch-sigma", "0", "-N", "4", s(&img)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let median = text.lines().find(|l| l.starts_with("median,")).unwrap();
    let delta: f64 = median.rsplit(',').next().unwrap().parse().unwrap();
    assert!(delta.abs() < 0.1, "{median}");

    // the calibration file feeds the encoder flag and the decoder
    let stream = dir.path().join("c.dajc");
    assert_eq!(dajc(&["encode", s(&img), "-o", s(&stream), "--calib", s(&calib)]).status.code(), Some(0));
    let decoded = dir.path().join("c.pgm");
    let out = dajc(&["decode", s(&stream), "-o", s(&decoded), "--calib", s(&calib)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut broken = std::fs::read_to_string(&calib).unwrap();
    broken.truncate(broken.len() / 2);
    std::fs::write(&calib, broken).unwrap();
    assert_eq!(dajc(&["decode", s(&stream), "-o", s(&decoded), "--calib", s(&calib)]).status.code(), Some(2));
}

#[test]
fn calibrate_with_mismatch_reports_gain() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let calib = dir.path().join("calib.json");
    let out = dajc(&[
        "calibrate", "-o", s(&calib), "--mismatch-sigma", "0.05", "--mismatch-seed", "2", "--parasitic-ff", "1",
        "-N", "4", s(&img),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let file = dajc::calib::CalibrationFile::load(&calib).unwrap();
    assert_eq!(file.averaging, 4);
    assert_eq!(file.mismatch_sigma, 0.05);
    assert!(stdout(&out).lines().count() == 3);
}

#[test]
fn sweeps_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let img = small_image(dir.path());
    let out_dir = dir.path().join("sweeps");
    let out = dajc(&["sweep", "--kind", "thresh", "--values", "0,6,12,24,48", "--out-dir", s(&out_dir), s(&img)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("sweep_thresh.csv")).unwrap();
    let table = dajc::cli::plot::Table::parse(&csv).unwrap();
    let frac = table.column("significant_fraction").unwrap();
    assert_eq!(frac.len(), 5);
    assert!(frac.windows(2).all(|w| w[1] <= w[0]));
    let svg = std::fs::read_to_string(out_dir.join("sweep_thresh.svg")).unwrap();
    assert_eq!(svg, dajc::cli::plot::svg_from_csv(&csv, "thresh_mv", "significant_fraction", "significant_fraction vs thresh_mv").unwrap());

    let out = dajc(&["sweep", "--kind", "framesize", "--values", "8,16,32", "--out-dir", s(&out_dir), s(&img)]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("sweep_framesize.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("sweep_framesize.csv.manifest.json").exists());
}

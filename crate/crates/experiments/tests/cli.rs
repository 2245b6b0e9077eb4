use std::path::Path;
use std::process::Command;

use serde_json::json;
use wnlw_core::random::GaussianDraw;
use wnlw_core::spectral::dump::read_series;
use wnlw_experiments::convergence::ConvergenceRow;
use wnlw_experiments::output::{read_csv, read_manifest};
use wnlw_experiments::triviality::TrivialityRow;

fn wnlw(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_wnlw")).args(args).output().expect("spawn wnlw");
    assert!(out.status.success(), "wnlw {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

/// Same table bytes, and manifests that differ only in the output directory.
fn assert_same_outputs(a: &Path, b: &Path, table: &str) {
    assert_eq!(std::fs::read(a.join(table)).unwrap(), std::fs::read(b.join(table)).unwrap());
    let (ma, mut mb) = (read_manifest(a).unwrap(), read_manifest(b).unwrap());
    assert_eq!(mb.config.out_dir, b);
    mb.config.out_dir = ma.config.out_dir.clone();
    assert_eq!(ma, mb);
}

/// Small ladder and step count so the solver commands finish quickly.
fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    let cfg = json!({
        "alpha": 1.4,
        "n_ladder": [1, 2, 4],
        "T": 0.05,
        "dt": 0.05 / 32.0,
        "sample_count": 3,
        "master_seed": 5,
    });
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn renorm_table_and_rerun_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        wnlw(&["renorm", "--alpha", "1.5", "--nmax", "8", "--out", d.to_str().unwrap()]);
    }
    assert_eq!(header(&a.join("renorm.csv")), "N,sigma,alpha_N,C_N,R_N");
    assert_same_outputs(&a, &b, "renorm.csv");
    let text = std::fs::read_to_string(a.join("renorm.csv")).unwrap();
    let row1: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row1[0], 1.0);
    assert!((row1[3] - 3.600).abs() < 1e-3);
    let m = read_manifest(&a).unwrap();
    assert_eq!(m.command, "renorm");
    assert_eq!(m.config.alpha, 1.5);
    assert_eq!(m.files, vec!["renorm.csv".to_string()]);
}

#[test]
fn converge_writes_rows_per_seed_and_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        wnlw(&["converge", "--config", &cfg, "--out", d.to_str().unwrap()]);
    }
    assert_eq!(header(&a.join("converge.csv")), "seed,N,d_N,flagged");
    let rows: Vec<ConvergenceRow> = read_csv(&a.join("converge.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.d_n.is_finite() && r.d_n > 0.0 && !r.flagged));
    let m = read_manifest(&a).unwrap();
    assert_eq!(m.seeds.len(), 3);
    assert_eq!(m.config.master_seed, 5);
    assert!(m.versions.contains_key("wnlw-core"));
    assert_same_outputs(&a, &b, "converge.csv");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    wnlw(&["converge", "--config", &cfg, "--seeds", "1", "--seed", "9", "--out", out.to_str().unwrap()]);
    let m = read_manifest(&out).unwrap();
    assert_eq!(m.config.sample_count, 1);
    assert_eq!(m.config.master_seed, 9);
    assert_eq!(m.config.n_ladder, vec![1, 2, 4]);
}

#[test]
fn triviality_table_has_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("t");
    wnlw(&["triviality", "--config", &cfg, "--seeds", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(header(&out.join("triviality.csv")), "seed,N,phi_id,re_pairing,im_pairing,variant");
    let rows: Vec<TrivialityRow> = read_csv(&out.join("triviality.csv")).unwrap();
    // one seed, three levels, two variants, three test functions
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r.re_pairing.is_finite() && r.im_pairing.is_finite()));
}

#[test]
fn sample_dump_reproduces_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    wnlw(&["sample", "--nmax", "4", "--seed", "21", "--out", out.to_str().unwrap()]);
    let mut f = std::fs::File::open(out.join("draw.wnlw")).unwrap();
    let (_, recs) = read_series(&mut f).unwrap();
    let draw = GaussianDraw::sample(21, 4);
    assert_eq!(recs.len(), 1);
    assert_eq!(&recs[0].fields[0], draw.g());
    assert_eq!(&recs[0].fields[1], draw.h());
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"alpha": 1.4, "nmax": 8}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wnlw"))
        .args(["renorm", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn invalid_alpha_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wnlw"))
        .args(["converge", "--alpha", "1.7", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

mod common;

use std::path::Path;

use spectradec::cli::{run, EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE};
use spectradec::imgio::save_image;
use spectradec::kernels::{FwKanStack, RationalActivation};

use common::*;

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("spectradec").chain(list.iter().copied()).map(String::from).collect()
}

#[test]
fn analyze_same_image_is_all_inf() {
    let dir = tempfile::tempdir().unwrap();
    let img = natural_image(&mut rng(1), 20, 12);
    let p = dir.path().join("a.png");
    save_image(&img, &p).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(args(&["analyze", "--input", &s(&p), "--gt", &s(&p), "--out", &s(&out)])), EXIT_OK);
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,psnr_filled,psnr_drained"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[1..], &["inf", "inf"]);
    }
    assert!(out.join("exchanged_input.png").is_file());
    assert!(out.join("zero_swap.json").is_file());
}

#[test]
fn analyze_custom_ks_without_dc() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(2);
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    save_image(&natural_image(&mut r, 24, 24), &a).unwrap();
    save_image(&natural_image(&mut r, 24, 24), &b).unwrap();
    let out = dir.path().join("out");
    let code = run(args(&["analyze", "--input", &s(&a), "--gt", &s(&b), "--out", &s(&out), "--ks", "0,4,16", "--no-dc"]));
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let ks: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, vec!["0", "4", "16"]);

    let bad = run(args(&["analyze", "--input", &s(&a), "--gt", &s(&b), "--out", &s(&out), "--ks", "4,2"]));
    assert_eq!(bad, EXIT_USAGE);
    let far = run(args(&["analyze", "--input", &s(&a), "--gt", &s(&b), "--out", &s(&out), "--ks", "0,99"]));
    assert_eq!(far, EXIT_USAGE);
}

#[test]
fn evaluate_identical_and_missing() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, rs) = (dir.path().join("gt"), dir.path().join("rs"));
    std::fs::create_dir_all(&gt).unwrap();
    std::fs::create_dir_all(&rs).unwrap();
    let mut r = rng(3);
    for i in 0..3 {
        let img = natural_image(&mut r, 16, 16);
        save_image(&img, gt.join(format!("{i}.png"))).unwrap();
        save_image(&img, rs.join(format!("{i}.png"))).unwrap();
    }
    let out = dir.path().join("m.csv");
    assert_eq!(run(args(&["evaluate", "--restored", &s(&rs), "--gt", &s(&gt), "--out", &s(&out)])), EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<String>> = text.lines().map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows[0].join(","), "path,psnr,ssim,zf_psnr,l_zf,l_lf,l_hf,k");
    assert_eq!(rows.len(), 5);
    for row in &rows[1..] {
        assert_eq!(row[1], "inf");
        assert_eq!(row[2], "1");
    }
    assert_eq!(rows[4][0], "mean");

    std::fs::remove_file(rs.join("1.png")).unwrap();
    assert_eq!(run(args(&["evaluate", "--restored", &s(&rs), "--gt", &s(&gt), "--out", &s(&out)])), EXIT_DATA);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn evaluate_summary_is_column_mean() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, rs) = (dir.path().join("gt"), dir.path().join("rs"));
    std::fs::create_dir_all(&gt).unwrap();
    std::fs::create_dir_all(&rs).unwrap();
    let mut r = rng(4);
    for i in 0..4 {
        let img = natural_image(&mut r, 16, 16);
        save_image(&img, gt.join(format!("{i}.png"))).unwrap();
        let noisy = spectradec::degrade::add_gaussian_noise(&img, 5.0 + 5.0 * i as f64, i).unwrap();
        save_image(&noisy, rs.join(format!("{i}.png"))).unwrap();
    }
    let out = dir.path().join("m.csv");
    assert_eq!(run(args(&["evaluate", "--restored", &s(&rs), "--gt", &s(&gt), "--k", "2", "--out", &s(&out)])), EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let (body, summary) = rows.split_at(4);
    for col in 0..7 {
        let mean = body.iter().map(|r| r[col]).sum::<f64>() / 4.0;
        assert!((mean - summary[0][col]).abs() <= 1e-12 * mean.abs().max(1.0), "column {col}");
    }
}

#[test]
fn kan_check_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run(args(&["kan-check", "--trials", "50", "--out", &s(&out)])), EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["identity_max_err"].as_f64().unwrap() < 1e-4);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"window_len\": 4, \"layers\": [").unwrap();
    assert_eq!(run(args(&["kan-check", "--stack", &s(&bad)])), EXIT_USAGE);
    assert_eq!(run(args(&["kan-check", "--stack", "/nonexistent/stack.json"])), EXIT_IO);

    let stack_path = dir.path().join("s.json");
    let stack = spectradec::kernels::init_variance_preserving(&FwKanStack::zeros(8, &[8], 2), 3).unwrap();
    std::fs::write(&stack_path, stack.to_json().unwrap()).unwrap();
    let (o1, o2) = (dir.path().join("o1.json"), dir.path().join("o2.json"));
    for o in [&o1, &o2] {
        assert_eq!(run(args(&["--seed", "9", "kan-check", "--stack", &s(&stack_path), "--trials", "100", "--out", &s(o)])), EXIT_OK);
    }
    assert_eq!(std::fs::read(&o1).unwrap(), std::fs::read(&o2).unwrap());
}

#[test]
fn kan_check_tolerance_failure() {
    // x^5 * 1e300 overflows, so the difference quotient is NaN
    let dir = tempfile::tempdir().unwrap();
    let mut stack = FwKanStack::identity(4, 1);
    stack.layers[0].activation.groups[0] = RationalActivation::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 1e300], vec![]).unwrap();
    let p = dir.path().join("s.json");
    std::fs::write(&p, stack.to_json().unwrap()).unwrap();
    assert_eq!(run(args(&["kan-check", "--stack", &s(&p), "--trials", "50", "--out", &s(&dir.path().join("r.json"))])), EXIT_TOLERANCE);
}

#[test]
fn dct_dump_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = natural_image(&mut rng(5), 33, 17);
    let p = dir.path().join("a.png");
    save_image(&img, &p).unwrap();
    let spec = dir.path().join("a.spec");
    let back = dir.path().join("b.png");
    assert_eq!(run(args(&["dct", "--input", &s(&p), "--out", &s(&spec)])), EXIT_OK);
    assert_eq!(std::fs::metadata(&spec).unwrap().len(), 16 + 33 * 17 * 3 * 4);
    assert_eq!(run(args(&["dct", "--inverse", "--input", &s(&spec), "--out", &s(&back)])), EXIT_OK);
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&back).unwrap());

    std::fs::write(&spec, b"SPEC\x01").unwrap();
    assert_eq!(run(args(&["dct", "--inverse", "--input", &s(&spec), "--out", &s(&back)])), EXIT_IO);
}

#[test]
fn binary_reads_thread_env() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.png");
    save_image(&natural_image(&mut rng(6), 8, 8), &p).unwrap();
    let exe = env!("CARGO_BIN_EXE_spectradec");
    let status = |threads: &str| {
        std::process::Command::new(exe)
            .args(["dct", "--input", &s(&p), "--out", &s(&dir.path().join("a.spec"))])
            .env("SPECTRADEC_THREADS", threads)
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(status("2"), Some(EXIT_OK));
    assert_eq!(status("lots"), Some(EXIT_USAGE));
}

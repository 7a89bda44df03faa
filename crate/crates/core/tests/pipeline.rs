mod common;

use std::collections::BTreeSet;

use rand::Rng;
use spectradec::curation::{run_pipeline, CurationConfig, CurationManifest, ScreenThresholds};
use spectradec::degrade::{add_gaussian_noise, build_benchmark, BenchmarkSpec, DegradationSpec, Split};
use spectradec::imgio::{load_image, save_image};
use spectradec::metrics::psnr;
use spectradec::{ColorSpace, Error, PlanarImage};

use common::*;

#[test]
fn texture_and_entropy_winners_can_be_disjoint() {
    // rough images on 16 gray levels versus a smooth ramp through all 256
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(1);
    for i in 0..4 {
        let planes = vec![(0..64 * 64).map(|_| r.random_range(0..16u32) as f64 * 17.0 / 255.0).collect()];
        let rough = PlanarImage::new(64, 64, ColorSpace::Luma, planes).unwrap();
        save_image(&rough, dir.path().join(format!("rough{i}.png"))).unwrap();
        let ramp = PlanarImage::from_fn(64, 64, ColorSpace::Luma, |_, x, y| {
            (((y * 64 + x + i * 7) % 4096) / 16) as f64 / 255.0
        })
        .unwrap();
        save_image(&ramp, dir.path().join(format!("ramp{i}.png"))).unwrap();
    }
    let config = CurationConfig {
        thresholds: ScreenThresholds::accept_all(),
        ..Default::default()
    };
    let m = run_pipeline(dir.path(), &config).unwrap();
    let sg: BTreeSet<&str> = m.reports.iter().filter(|r| r.flags.in_sg).map(|r| r.path.as_str()).collect();
    let se: BTreeSet<&str> = m.reports.iter().filter(|r| r.flags.in_se).map(|r| r.path.as_str()).collect();
    assert!(sg.iter().all(|p| p.starts_with("rough")), "{sg:?}");
    assert!(se.iter().all(|p| p.starts_with("ramp")), "{se:?}");
    assert_eq!((sg.len(), se.len()), (4, 4));
    assert_eq!(m.counts.selected, 0);
}

#[test]
fn manifest_persists() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(2);
    std::fs::create_dir_all(dir.path().join("sub")).unwrap();
    for i in 0..5 {
        save_image(&natural_image(&mut r, 32, 32), dir.path().join(format!("sub/n{i}.png"))).unwrap();
    }
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let m = run_pipeline(dir.path(), &CurationConfig::default()).unwrap();
    assert_eq!(m.counts.total, 5);
    assert!(m.reports.iter().all(|r| r.path.starts_with("sub/")));
    for r in &m.reports {
        assert!(r.shannon_entropy <= 8.0 && r.shannon_entropy >= 0.0);
        assert!((0.0..=1.0).contains(&r.edge_density));
        assert!(r.glcm.iter().all(|g| g.entropy <= (64f64 * 64.0).log2()));
        assert!(!r.flags.selected || (r.flags.in_sg && r.flags.in_se && r.flags.passed_screen));
    }
    let path = dir.path().join("m.json");
    m.save(&path).unwrap();
    assert_eq!(CurationManifest::load(&path).unwrap(), m);
    let mut csv = Vec::new();
    m.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("path,width,height,laplacian_var,edge_density,glcm_score,shannon_entropy,"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn curate_then_degrade() {
    let corpus = tempfile::tempdir().unwrap();
    let mut r = rng(3);
    for i in 0..14 {
        save_image(&natural_image(&mut r, 40, 32), corpus.path().join(format!("c{i:02}.png"))).unwrap();
    }
    let config = CurationConfig {
        thresholds: ScreenThresholds::accept_all(),
        glcm_fraction: 1.0,
        entropy_fraction: 1.0,
        ..Default::default()
    };
    let manifest = run_pipeline(corpus.path(), &config).unwrap();
    assert_eq!(manifest.counts.selected, 14);

    let levels = [15.0, 25.0, 50.0];
    let spec = BenchmarkSpec {
        train: 8,
        val: 1,
        test: 1,
        seed: 5,
        specs: levels.iter().map(|&sigma| DegradationSpec::GaussianNoise { sigma }).collect(),
    };
    let out = tempfile::tempdir().unwrap();
    let index = build_benchmark(&manifest, &spec, out.path()).unwrap();
    assert_eq!(index.entries.len(), 10);
    assert_eq!(index.split_sources(Split::Train).len(), 8);
    for e in &index.entries {
        let gt = load_image(out.path().join(&e.gt)).unwrap();
        let p: Vec<f64> = e
            .inputs
            .iter()
            .map(|i| psnr(&load_image(out.path().join(&i.path)).unwrap(), &gt).unwrap())
            .collect();
        assert!(p[0] > p[1] && p[1] > p[2], "{}: {p:?}", e.source);
        assert!(e.gt.starts_with(e.split.name()));
    }

    let empty = BenchmarkSpec { specs: vec![], ..spec.clone() };
    assert!(matches!(build_benchmark(&manifest, &empty, out.path()), Err(Error::InsufficientSpecs)));
    let greedy = BenchmarkSpec { train: 20, ..spec };
    assert!(matches!(
        build_benchmark(&manifest, &greedy, out.path()),
        Err(Error::InsufficientImages { needed: 22, available: 14 })
    ));
}

#[test]
fn noise_stream_ignores_processing_order() {
    let img = natural_image(&mut rng(4), 16, 16);
    let seed = spectradec::degrade::derive_seed(7, "a/b.png", "noise25");
    let a = add_gaussian_noise(&img, 25.0, seed).unwrap();
    let b = std::thread::spawn(move || add_gaussian_noise(&img, 25.0, seed).unwrap()).join().unwrap();
    assert_eq!(a, b);
    assert_ne!(seed, spectradec::degrade::derive_seed(7, "a/b.png", "noise15"));
}

//! Curate a directory of images and print the selection.
//!
//! cargo run --example curate -- CORPUS_DIR [manifest.json]
//!
//! Without arguments a small synthetic corpus is generated in a temp dir.

use std::path::PathBuf;

use spectradec::curation::{run_pipeline, CurationConfig};
use spectradec::imgio::save_image;
use spectradec::{ColorSpace, PlanarImage};

fn synthetic_corpus() -> spectradec::Result<PathBuf> {
    let dir = std::env::temp_dir().join("spectradec-curate-example");
    std::fs::create_dir_all(&dir).expect("create temp dir");
    for i in 0..12usize {
        let period = 1.2 + 0.1 * i as f64;
        let img = match i % 3 {
            0 => PlanarImage::filled(48, 48, ColorSpace::Rgb, 0.2 + 0.05 * i as f64)?,
            1 => PlanarImage::from_fn(48, 48, ColorSpace::Rgb, |c, x, y| {
                ((x * 7919 + y * 104729 + c * 31 + i * 13) % 251) as f64 / 250.0
            })?,
            _ => PlanarImage::from_fn(48, 48, ColorSpace::Rgb, |_, x, y| {
                0.5 + 0.25 * (x as f64 / period).sin() * (y as f64 / (period + 2.0)).cos()
            })?,
        };
        save_image(&img, dir.join(format!("img{i:02}.png")))?;
    }
    Ok(dir)
}

fn main() -> spectradec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let corpus = match args.first() {
        Some(d) => PathBuf::from(d),
        None => synthetic_corpus()?,
    };
    let config = CurationConfig {
        thresholds: spectradec::curation::ScreenThresholds {
            lap_high: 0.5,
            ..Default::default()
        },
        ..Default::default()
    };
    let manifest = run_pipeline(&corpus, &config)?;
    println!("{:?}", manifest.counts);
    for r in &manifest.reports {
        println!(
            "{:12} lap {:9.5} edges {:5.3} glcm {:+6.3} H {:5.3} {}",
            r.path,
            r.laplacian_var,
            r.edge_density,
            r.glcm_score,
            r.shannon_entropy,
            if r.flags.selected { "selected" } else { "" }
        );
    }
    if let Some(out) = args.get(1) {
        manifest.save(out)?;
    }
    Ok(())
}

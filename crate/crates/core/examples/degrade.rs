//! Noise and JPEG degradations at the benchmark levels, then a small paired
//! benchmark written to a temp dir.
//!
//! cargo run --example degrade [-- image.png]

use spectradec::degrade::{add_gaussian_noise, build_benchmark_from, jpeg_roundtrip, BenchmarkSpec, DegradationSpec};
use spectradec::imgio::{load_image, save_image};
use spectradec::metrics::psnr;
use spectradec::{ColorSpace, PlanarImage};

fn main() -> spectradec::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(p) => load_image(p)?,
        None => PlanarImage::from_fn(96, 64, ColorSpace::Rgb, |c, x, y| {
            (0.5 + 0.3 * ((x as f64 / 7.0).sin() + (y as f64 / 5.0).cos()) / 2.0 + 0.03 * c as f64).min(1.0)
        })?,
    };
    for sigma in [15.0, 25.0, 50.0] {
        let noisy = add_gaussian_noise(&img, sigma, 1)?;
        println!("noise sigma {sigma:>4}: {:.2} dB", psnr(&noisy, &img)?);
    }
    for q in [5u8, 10, 30] {
        let jpg = jpeg_roundtrip(&img, q)?;
        println!("jpeg q {q:>2}: {:.2} dB", psnr(&jpg, &img)?);
    }

    let root = std::env::temp_dir().join("spectradec-degrade-example");
    let corpus = root.join("corpus");
    std::fs::create_dir_all(&corpus).expect("create temp dir");
    let mut names = Vec::new();
    for i in 0..10 {
        let name = format!("img{i}.png");
        save_image(&img.map(|v| (v * (0.6 + 0.04 * i as f64)).min(1.0)), corpus.join(&name))?;
        names.push(name);
    }
    let spec = BenchmarkSpec::scaled(
        names.len(),
        2024,
        vec![DegradationSpec::GaussianNoise { sigma: 25.0 }, DegradationSpec::Jpeg { quality: 10 }],
    );
    let index = build_benchmark_from(&corpus, &names, &spec, root.join("bench"))?;
    println!(
        "benchmark: {} train / {} val / {} test pairs under {}",
        spec.train,
        spec.val,
        spec.test,
        root.join("bench").display()
    );
    println!("first entry: {}", serde_json::to_string(&index.entries[0])?);
    Ok(())
}

//! Full-resolution evaluation strategies: downsample-restore-upsample and
//! split-restore-stitch, with a toy "restoration" that brightens the image.
//!
//! cargo run --example resample

use spectradec::imgio::{resample, resize, split_patches, Filter, ResampleSpec};
use spectradec::metrics::psnr;
use spectradec::{ColorSpace, PlanarImage};

fn main() -> spectradec::Result<()> {
    let img = PlanarImage::from_fn(256, 192, ColorSpace::Rgb, |c, x, y| {
        (0.3 + 0.2 * (x as f64 / 9.0).sin() * (y as f64 / 13.0).cos() + 0.05 * c as f64).clamp(0.0, 1.0)
    })?;
    let restore = |p: &PlanarImage| Ok(p.map(|v| (v * 1.2).min(1.0)));
    let reference = restore(&img)?;

    for (name, spec) in [("resize x2", ResampleSpec::resize2()), ("stitch 2x2", ResampleSpec::stitch4())] {
        let out = resample(&img, &spec, restore)?;
        println!("{name:11} -> PSNR vs direct {:.2} dB", psnr(&out, &reference)?);
    }

    let small = resize(&img, 64, 48, Filter::Bicubic)?;
    println!("bicubic thumbnail {}x{}", small.width(), small.height());
    let patches = split_patches(&img, spectradec::imgio::Grid::new(3, 4))?;
    println!("{} patches of {}x{}", patches.len(), patches[0].width(), patches[0].height());
    Ok(())
}

//! Zero-frequency swap and the progressive band-fill curve for a synthetic
//! low-light pair, or for `input.png gt.png` when given.
//!
//! cargo run --example zero_swap [-- input.png gt.png]

use spectradec::analysis::{
    default_ks, progressive_fill_curve, synth_low_light, zero_component_map, zero_swap_experiment,
};
use spectradec::{imgio, ColorSpace, PlanarImage};

fn main() -> spectradec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (input, gt) = if args.len() == 2 {
        (imgio::load_image(&args[0])?, imgio::load_image(&args[1])?)
    } else {
        let gt = PlanarImage::from_fn(128, 96, ColorSpace::Rgb, |c, x, y| {
            let v = 0.45 + 0.25 * ((x * 3 + y) as f64 / 23.0).sin() + 0.1 * ((y as f64) / 9.0).cos();
            (v + 0.04 * c as f64).clamp(0.0, 1.0)
        })?;
        (synth_low_light(&gt, 2.2, 0.35), gt)
    };

    let swap = zero_swap_experiment(&input, &gt)?;
    println!("PSNR input         {:7.2} dB", swap.psnr_in);
    println!("PSNR exchanged in  {:7.2} dB", swap.psnr_xin);
    println!("PSNR exchanged gt  {:7.2} dB", swap.psnr_xgt);

    let ks = default_ks(gt.height(), gt.width());
    let curve = progressive_fill_curve(&input, &gt, &ks, true)?;
    curve.write_csv(std::io::stdout())?;

    let map = zero_component_map(&input, Some(16))?;
    println!("tiled DC map: {}x{}", map.width(), map.height());
    Ok(())
}

//! Image quality metrics and band-limited losses on a pair of images.
//!
//! cargo run --example metrics [-- restored.png gt.png [k]]

use spectradec::metrics::{evaluate_pair, l_hf, l_lf, l_zf, psnr, ssim, zf_psnr};
use spectradec::{imgio, ColorSpace, PlanarImage};

fn main() -> spectradec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(8);
    let (restored, gt) = if args.len() >= 2 {
        (imgio::load_image(&args[0])?, imgio::load_image(&args[1])?)
    } else {
        let gt = PlanarImage::from_fn(64, 64, ColorSpace::Rgb, |c, x, y| {
            ((x ^ y) % 32) as f64 / 40.0 + 0.05 * c as f64
        })?;
        (gt.map(|v| (v + 1.0 / 255.0).min(1.0)), gt)
    };

    println!("psnr     {:.3}", psnr(&restored, &gt)?);
    println!("ssim     {:.5}", ssim(&restored, &gt)?);
    println!("zf_psnr  {:.3}", zf_psnr(&restored, &gt)?);
    println!("l_zf     {:.6}", l_zf(&restored, &gt)?);
    println!("l_lf(k)  {:.6}", l_lf(&restored, &gt, k)?);
    println!("l_hf(k)  {:.6}", l_hf(&restored, &gt, k)?);

    let rec = evaluate_pair("pair", &restored, &gt, k)?;
    println!("{}", serde_json::to_string(&rec)?);
    Ok(())
}

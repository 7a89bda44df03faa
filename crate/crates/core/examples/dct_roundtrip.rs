//! Forward/inverse DCT of an image, energy compaction and the raw spectrum dump.
//!
//! cargo run --example dct_roundtrip [-- image.png]

use spectradec::spectral::{dct2_tiled, idct2_tiled, read_spectrum, write_spectrum, BandMask};
use spectradec::{dct2, idct2, imgio, ColorSpace, PlanarImage};

fn main() -> spectradec::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(p) => imgio::load_image(p)?,
        None => PlanarImage::from_fn(320, 240, ColorSpace::Rgb, |c, x, y| {
            0.5 + 0.3 * ((x as f64 / 17.0).sin() * (y as f64 / 11.0).cos()) - 0.05 * c as f64
        })?,
    };
    let spec = dct2(&img);
    let back = idct2(&spec)?;
    let err = img
        .planes()
        .iter()
        .flatten()
        .zip(back.planes().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{}x{}x{} round trip max error {err:.2e}", img.width(), img.height(), img.channels());

    let total = spec.energy();
    for k in [0, 4, 16, 64] {
        let mask = BandMask::square(k, img.height(), img.width())?;
        let kept = spec.masked(&mask)?.energy();
        println!("energy in [0,{k}]^2: {:.4}%", 100.0 * kept / total);
    }

    let tiled = dct2_tiled(&img, 64)?;
    let tiled_back = idct2_tiled(&tiled, 64)?;
    println!("tiled (64) round trip equal shape: {}", tiled_back.same_shape(&img));

    let mut buf = Vec::new();
    write_spectrum(&spec, &mut buf).expect("write to memory");
    let again = read_spectrum(buf.as_slice())?;
    println!("spectrum dump: {} bytes, {} channels", buf.len(), again.channels());
    Ok(())
}

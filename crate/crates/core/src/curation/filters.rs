//! Low-level screening statistics on luma planes. Responses use replicated
//! borders; statistics are taken over interior pixels only (the whole plane
//! when it has no interior).

use crate::error::{Error, Result};
use crate::imgio::PlanarImage;

pub(crate) fn require_luma(img: &PlanarImage) -> Result<&[f64]> {
    if img.channels() != 1 {
        return Err(Error::WrongChannelCount {
            expected: 1,
            actual: img.channels(),
        });
    }
    Ok(img.plane(0))
}

/// Interior pixel coordinates, or every pixel for planes thinner than 3.
fn support(w: usize, h: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    if w >= 3 && h >= 3 {
        (1..w - 1, 1..h - 1)
    } else {
        (0..w, 0..h)
    }
}

#[inline]
fn at(p: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let x = x.clamp(0, w as isize - 1) as usize;
    let y = y.clamp(0, h as isize - 1) as usize;
    p[y * w + x]
}

/// Variance of the 4-neighbour Laplacian `[0 1 0; 1 -4 1; 0 1 0]`.
pub fn laplacian_variance(img: &PlanarImage) -> Result<f64> {
    let p = require_luma(img)?;
    let (w, h) = (img.width(), img.height());
    let (xs, ys) = support(w, h);
    let mut resp = Vec::with_capacity(xs.len() * ys.len());
    for y in ys {
        for x in xs.clone() {
            let (xi, yi) = (x as isize, y as isize);
            resp.push(
                at(p, w, h, xi, yi - 1) + at(p, w, h, xi - 1, yi) + at(p, w, h, xi + 1, yi)
                    + at(p, w, h, xi, yi + 1)
                    - 4.0 * p[y * w + x],
            );
        }
    }
    let n = resp.len() as f64;
    let mean = resp.iter().sum::<f64>() / n;
    Ok(resp.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n)
}

/// 3x3 Sobel gradient magnitude at `(x, y)`.
pub fn sobel_magnitude(p: &[f64], w: usize, h: usize, x: usize, y: usize) -> f64 {
    let (x, y) = (x as isize, y as isize);
    let v = |dx: isize, dy: isize| at(p, w, h, x + dx, y + dy);
    let gx = (v(1, -1) + 2.0 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2.0 * v(-1, 0) + v(-1, 1));
    let gy = (v(-1, 1) + 2.0 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2.0 * v(0, -1) + v(1, -1));
    (gx * gx + gy * gy).sqrt()
}

/// Fraction of interior pixels whose Sobel magnitude exceeds `threshold`.
pub fn sobel_edge_density(img: &PlanarImage, threshold: f64) -> Result<f64> {
    let p = require_luma(img)?;
    let (w, h) = (img.width(), img.height());
    let (xs, ys) = support(w, h);
    let total = xs.len() * ys.len();
    let mut hits = 0usize;
    for y in ys {
        for x in xs.clone() {
            if sobel_magnitude(p, w, h, x, y) > threshold {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / total as f64)
}

/// 256-bin histogram over `round(v * 255)`.
pub fn histogram256(img: &PlanarImage) -> Result<[u64; 256]> {
    let p = require_luma(img)?;
    let mut hist = [0u64; 256];
    for &v in p {
        hist[(v.clamp(0.0, 1.0) * 255.0).round() as usize] += 1;
    }
    Ok(hist)
}

/// Shannon entropy of the 256-bin intensity histogram, in bits.
pub fn shannon_entropy(img: &PlanarImage) -> Result<f64> {
    let hist = histogram256(img)?;
    let n = hist.iter().sum::<u64>() as f64;
    Ok(hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

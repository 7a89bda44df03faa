//! Gray-level co-occurrence statistics.

use serde::{Deserialize, Serialize};

use super::filters::require_luma;
use crate::error::{Error, Result};
use crate::imgio::PlanarImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "45")]
    Deg45,
    #[serde(rename = "90")]
    Deg90,
    #[serde(rename = "135")]
    Deg135,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Deg0,
        Orientation::Deg45,
        Orientation::Deg90,
        Orientation::Deg135,
    ];

    /// `(dy, dx)` to the neighbour at distance `d`; up is negative y.
    pub fn offset(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            Orientation::Deg0 => (0, d),
            Orientation::Deg45 => (-d, d),
            Orientation::Deg90 => (-d, 0),
            Orientation::Deg135 => (-d, -d),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Orientation::Deg0 => 0,
            Orientation::Deg45 => 45,
            Orientation::Deg90 => 90,
            Orientation::Deg135 => 135,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlcmParams {
    pub levels: usize,
    pub distance: usize,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self {
            levels: 64,
            distance: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlcmStats {
    pub orientation: Orientation,
    pub contrast: f64,
    /// Joint entropy in bits.
    pub entropy: f64,
    /// 0 when the marginal variance vanishes; see `degenerate`.
    pub correlation: f64,
    pub degenerate: bool,
}

/// Bin index `min(floor(v * levels), levels - 1)`.
pub fn quantize(img: &PlanarImage, levels: usize) -> Result<Vec<usize>> {
    let p = require_luma(img)?;
    Ok(p.iter()
        .map(|&v| ((v.clamp(0.0, 1.0) * levels as f64).floor() as usize).min(levels - 1))
        .collect())
}

/// Normalised symmetric co-occurrence matrix, row-major `levels x levels`.
pub fn glcm_matrix(
    q: &[usize],
    w: usize,
    h: usize,
    levels: usize,
    distance: usize,
    orientation: Orientation,
) -> Vec<f64> {
    let (dy, dx) = orientation.offset(distance);
    let mut counts = vec![0u64; levels * levels];
    for y in 0..h as isize {
        let ny = y + dy;
        if ny < 0 || ny >= h as isize {
            continue;
        }
        for x in 0..w as isize {
            let nx = x + dx;
            if nx < 0 || nx >= w as isize {
                continue;
            }
            let a = q[(y as usize) * w + x as usize];
            let b = q[(ny as usize) * w + nx as usize];
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; levels * levels];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Contrast, entropy and correlation of a normalised co-occurrence matrix.
pub fn matrix_stats(p: &[f64], levels: usize, orientation: Orientation) -> GlcmStats {
    let mut contrast = 0.0;
    let mut entropy = 0.0;
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            if v > 0.0 {
                let d = i as f64 - j as f64;
                contrast += v * d * d;
                entropy -= v * v.log2();
                mu_i += v * i as f64;
                mu_j += v * j as f64;
            }
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            if v > 0.0 {
                let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
                var_i += v * di * di;
                var_j += v * dj * dj;
                cov += v * di * dj;
            }
        }
    }
    let denom = (var_i * var_j).sqrt();
    let degenerate = !(denom > 1e-12);
    GlcmStats {
        orientation,
        contrast,
        entropy: entropy.max(0.0),
        correlation: if degenerate { 0.0 } else { cov / denom },
        degenerate,
    }
}

/// Per-orientation statistics, in the order of `orientations`.
pub fn glcm_stats(
    img: &PlanarImage,
    params: GlcmParams,
    orientations: &[Orientation],
) -> Result<Vec<GlcmStats>> {
    if params.levels < 2 {
        return Err(Error::Config(format!("GLCM needs >= 2 levels, got {}", params.levels)));
    }
    if params.distance == 0 {
        return Err(Error::Config("GLCM distance must be >= 1".into()));
    }
    let q = quantize(img, params.levels)?;
    Ok(orientations
        .iter()
        .map(|&o| {
            let m = glcm_matrix(&q, img.width(), img.height(), params.levels, params.distance, o);
            matrix_stats(&m, params.levels, o)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::ColorSpace;

    fn luma(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> PlanarImage {
        PlanarImage::from_fn(w, h, ColorSpace::Luma, |_, x, y| f(x, y)).unwrap()
    }

    #[test]
    fn constant_is_degenerate() {
        let s = glcm_stats(&luma(8, 8, |_, _| 0.3), GlcmParams::default(), &Orientation::ALL).unwrap();
        for st in s {
            assert_eq!((st.contrast, st.entropy, st.correlation), (0.0, 0.0, 0.0));
            assert!(st.degenerate);
        }
    }

    #[test]
    fn checkerboard_two_by_two() {
        let l = 64usize;
        let img = luma(2, 2, |x, y| if (x + y) % 2 == 0 { 0.0 } else { 1.0 });
        let s = glcm_stats(&img, GlcmParams::default(), &[Orientation::Deg0]).unwrap()[0];
        assert_eq!(s.contrast, ((l - 1) * (l - 1)) as f64);
        assert_eq!(s.entropy, 1.0);
        assert!((s.correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded() {
        let img = luma(32, 32, |x, y| ((x * 131 + y * 71) % 97) as f64 / 96.0);
        for st in glcm_stats(&img, GlcmParams { levels: 8, distance: 2 }, &Orientation::ALL).unwrap() {
            assert!(st.entropy <= (64f64).log2() + 1e-12);
            assert!(st.correlation.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bad_params() {
        let img = luma(4, 4, |_, _| 0.0);
        assert!(glcm_stats(&img, GlcmParams { levels: 1, distance: 1 }, &Orientation::ALL).is_err());
        assert!(glcm_stats(&img, GlcmParams { levels: 4, distance: 0 }, &Orientation::ALL).is_err());
    }
}

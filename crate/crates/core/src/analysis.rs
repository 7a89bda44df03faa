//! Band-exchange experiments between a degraded image and its ground truth.
//!
//! PSNR values here are computed from spectral differences, which for the
//! orthonormal DCT equal the spatial PSNR of the reconstructed images. Doing
//! it in the coefficient domain makes the full-exchange endpoint exactly
//! `inf` and the fill curve exactly monotone.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::PlanarImage;
use crate::metrics::spectral_psnr;
use crate::serde_inf;
use crate::spectral::{dc_reconstruct, dct2, exchange_band, idct2, BandMask};

#[derive(Debug, Clone)]
pub struct ZeroSwapReport {
    /// Degraded input carrying the ground-truth DC coefficient.
    pub exchanged_input: PlanarImage,
    /// Ground truth carrying the degraded DC coefficient.
    pub exchanged_gt: PlanarImage,
    pub psnr_in: f64,
    pub psnr_xin: f64,
    pub psnr_xgt: f64,
}

pub fn zero_swap_experiment(input: &PlanarImage, gt: &PlanarImage) -> Result<ZeroSwapReport> {
    input.check_same_shape(gt)?;
    let (si, sg) = (dct2(input), dct2(gt));
    let mask = BandMask::zero(gt.height(), gt.width())?;
    let (xin, xgt) = exchange_band(&si, &sg, &mask)?;
    Ok(ZeroSwapReport {
        psnr_in: spectral_psnr(&si, &sg)?,
        psnr_xin: spectral_psnr(&xin, &sg)?,
        psnr_xgt: spectral_psnr(&xgt, &sg)?,
        exchanged_input: idct2(&xin)?,
        exchanged_gt: idct2(&xgt)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeCurve {
    pub ks: Vec<usize>,
    /// PSNR of the input with band `[0,k]^2` replaced by ground truth.
    #[serde(with = "serde_inf::vec")]
    pub psnr_filled: Vec<f64>,
    /// PSNR of the ground truth with the same band replaced by the input.
    #[serde(with = "serde_inf::vec")]
    pub psnr_drained: Vec<f64>,
    pub include_dc: bool,
}

impl ExchangeCurve {
    /// CSV with header `k,psnr_filled,psnr_drained`; infinities as `inf`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(["k", "psnr_filled", "psnr_drained"])
            .map_err(csv_err)?;
        for ((k, f), d) in self.ks.iter().zip(&self.psnr_filled).zip(&self.psnr_drained) {
            w.write_record([k.to_string(), serde_inf::format(*f), serde_inf::format(*d)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("csv", e))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `0, 1, 2, 4, 8, ...` up to and including `max(H, W) - 1`.
pub fn default_ks(height: usize, width: usize) -> Vec<usize> {
    let max = height.max(width) - 1;
    let mut ks = vec![0];
    let mut k = 1;
    while k < max {
        ks.push(k);
        k *= 2;
    }
    if max > 0 {
        ks.push(max);
    }
    ks
}

fn fill_mask(k: usize, include_dc: bool, h: usize, w: usize) -> Result<BandMask> {
    if include_dc {
        BandMask::square(k, h, w)
    } else {
        BandMask::low(k, h, w)
    }
}

fn check_ks(ks: &[usize], h: usize, w: usize) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::InvalidCutoffs("empty cutoff list".into()));
    }
    if !ks.windows(2).all(|p| p[0] < p[1]) {
        return Err(Error::InvalidCutoffs(format!("{ks:?} is not strictly increasing")));
    }
    let max = h.max(w) - 1;
    match ks.iter().find(|&&k| k > max) {
        Some(&k) => Err(Error::CutoffOutOfRange { k, max }),
        None => Ok(()),
    }
}

/// For each `k`, swaps the `[0,k]^2` block (without DC when `include_dc` is
/// false) between the input and ground-truth spectra and records both PSNRs.
pub fn progressive_fill_curve(
    input: &PlanarImage,
    gt: &PlanarImage,
    ks: &[usize],
    include_dc: bool,
) -> Result<ExchangeCurve> {
    input.check_same_shape(gt)?;
    let (h, w) = (gt.height(), gt.width());
    check_ks(ks, h, w)?;
    let (si, sg) = (dct2(input), dct2(gt));
    let points = ks
        .par_iter()
        .map(|&k| {
            let (filled, drained) = exchange_band(&si, &sg, &fill_mask(k, include_dc, h, w)?)?;
            Ok((spectral_psnr(&filled, &sg)?, spectral_psnr(&drained, &sg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (psnr_filled, psnr_drained) = points.into_iter().unzip();
    Ok(ExchangeCurve {
        ks: ks.to_vec(),
        psnr_filled,
        psnr_drained,
        include_dc,
    })
}

/// Reconstruction of the band-filled input at cutoff `k`.
pub fn filled_image(
    input: &PlanarImage,
    gt: &PlanarImage,
    k: usize,
    include_dc: bool,
) -> Result<PlanarImage> {
    input.check_same_shape(gt)?;
    let mask = fill_mask(k, include_dc, gt.height(), gt.width())?;
    let (filled, _) = exchange_band(&dct2(input), &dct2(gt), &mask)?;
    idct2(&filled)
}

/// DC-only reconstruction. With `tile = Some(t)`, each `t x t` tile (edge
/// tiles may be smaller) is replaced by its own mean, giving a spatially
/// varying zero-frequency map.
pub fn zero_component_map(img: &PlanarImage, tile: Option<usize>) -> Result<PlanarImage> {
    let (w, h) = (img.width(), img.height());
    match tile {
        None => dc_reconstruct(&dct2(img)),
        Some(0) => Err(Error::InvalidSpec("tile size must be >= 1".into())),
        Some(t) if t >= w && t >= h => dc_reconstruct(&dct2(img)),
        Some(t) => {
            let planes = img
                .planes()
                .iter()
                .map(|p| {
                    let mut out = vec![0.0; w * h];
                    for ty in (0..h).step_by(t) {
                        for tx in (0..w).step_by(t) {
                            let (y1, x1) = ((ty + t).min(h), (tx + t).min(w));
                            let n = ((y1 - ty) * (x1 - tx)) as f64;
                            let dc = (ty..y1)
                                .map(|y| p[y * w + tx..y * w + x1].iter().sum::<f64>())
                                .sum::<f64>()
                                / n.sqrt();
                            let v = dc / n.sqrt();
                            for y in ty..y1 {
                                out[y * w + tx..y * w + x1].fill(v);
                            }
                        }
                    }
                    out
                })
                .collect();
            PlanarImage::new(w, h, img.colorspace(), planes)
        }
    }
}

/// Gamma + gain low-light synthesis: `gain * x^gamma`, clamped to `[0, 1]`.
pub fn synth_low_light(img: &PlanarImage, gamma: f64, gain: f64) -> PlanarImage {
    img.map(|v| (gain * v.max(0.0).powf(gamma)).clamp(0.0, 1.0))
}

/// Separable Gaussian blur with replicated borders (radius `ceil(3 sigma)`).
pub fn synth_blur(img: &PlanarImage, sigma: f64) -> Result<PlanarImage> {
    if sigma <= 0.0 {
        return Ok(img.clone());
    }
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let planes = img
        .planes()
        .iter()
        .map(|p| {
            let mut tmp = vec![0.0; p.len()];
            for y in 0..h {
                for x in 0..w {
                    tmp[(y * w + x) as usize] = k
                        .iter()
                        .enumerate()
                        .map(|(i, kv)| kv * p[(y * w + (x + i as isize - r).clamp(0, w - 1)) as usize])
                        .sum();
                }
            }
            let mut out = vec![0.0; p.len()];
            for y in 0..h {
                for x in 0..w {
                    out[(y * w + x) as usize] = k
                        .iter()
                        .enumerate()
                        .map(|(i, kv)| kv * tmp[((y + i as isize - r).clamp(0, h - 1) * w + x) as usize])
                        .sum();
                }
            }
            out
        })
        .collect();
    PlanarImage::new(img.width(), img.height(), img.colorspace(), planes)
}

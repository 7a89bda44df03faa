//! Full-reference quality metrics and the band-limited spectral losses.
//!
//! All images are assumed to have peak value 1.0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::PlanarImage;
use crate::kernels::{aap, FeatureMap, LinearMap};
use crate::spectral::{dct2, BandMask, Spectrum};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// `10 log10(1 / mse)`; `inf` for `mse == 0`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

pub fn mse(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(sse(a.planes(), b.planes()) / (a.width() * a.height() * a.channels()) as f64)
}

fn sse(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q))
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

pub fn psnr(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// PSNR computed from coefficient differences. For the orthonormal DCT this
/// equals the spatial PSNR of the reconstructions.
pub fn spectral_psnr(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = (a.width() * a.height() * a.channels()) as f64;
    Ok(psnr_from_mse(sse(a.planes(), b.planes()) / n))
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let r = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable "valid" filtering; output is `(w - 10) x (h - 10)`.
fn blur_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w + 1 - SSIM_WINDOW;
    let oh = h + 1 - SSIM_WINDOW;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&line[x..x + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, a)| a * rows[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

fn ssim_plane(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    let k = gaussian_kernel();
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x * y).collect() };
    let mu_a = blur_valid(a, w, h, &k);
    let mu_b = blur_valid(b, w, h, &k);
    let aa = blur_valid(&prod(a, a), w, h, &k);
    let bb = blur_valid(&prod(b, b), w, h, &k);
    let ab = blur_valid(&prod(a, b), w, h, &k);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    total / n as f64
}

/// Mean SSIM over 11x11 Gaussian windows (sigma 1.5, K1 0.01, K2 0.03,
/// dynamic range 1), averaged over channels.
pub fn ssim(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    a.check_same_shape(b)?;
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: a.width(),
            height: a.height(),
            window: SSIM_WINDOW,
        });
    }
    let total: f64 = a
        .planes()
        .iter()
        .zip(b.planes())
        .map(|(p, q)| ssim_plane(p, q, a.width(), a.height()))
        .sum();
    Ok(total / a.channels() as f64)
}

/// Sum over channels and masked indices of `|A(i,j) - B(i,j)|`.
pub fn band_l1_spectra(a: &Spectrum, b: &Spectrum, mask: &BandMask) -> Result<f64> {
    a.check_same_shape(b)?;
    a.check_mask(mask)?;
    let idx = mask.indices();
    Ok(a.planes()
        .iter()
        .zip(b.planes())
        .map(|(p, q)| idx.iter().map(|&i| (p[i] - q[i]).abs()).sum::<f64>())
        .sum())
}

pub fn band_l1(a: &PlanarImage, b: &PlanarImage, mask: &BandMask) -> Result<f64> {
    a.check_same_shape(b)?;
    band_l1_spectra(&dct2(a), &dct2(b), mask)
}

/// Zero-frequency term: `|DC(a) - DC(b)|` summed over channels.
pub fn l_zf(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    band_l1(a, b, &BandMask::zero(a.height(), a.width())?)
}

/// Low-frequency term over `[0,k]^2` without DC.
pub fn l_lf(a: &PlanarImage, b: &PlanarImage, k: usize) -> Result<f64> {
    band_l1(a, b, &BandMask::low(k, a.height(), a.width())?)
}

/// High-frequency term over `{i >= k or j >= k}`.
pub fn l_hf(a: &PlanarImage, b: &PlanarImage, k: usize) -> Result<f64> {
    band_l1(a, b, &BandMask::high(k, a.height(), a.width())?)
}

/// Per-channel means by direct summation.
pub fn channel_means(img: &PlanarImage) -> Vec<f64> {
    let n = (img.width() * img.height()) as f64;
    img.planes().iter().map(|p| p.iter().sum::<f64>() / n).collect()
}

/// PSNR between the DC-only reconstructions of `a` and `b`, i.e. between
/// their per-channel means.
pub fn zf_psnr(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    a.check_same_shape(b)?;
    let (ma, mb) = (channel_means(a), channel_means(b));
    let mse = ma.iter().zip(&mb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / ma.len() as f64;
    Ok(psnr_from_mse(mse))
}

pub fn mean_abs_error(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n: usize = a.iter().map(Vec::len).sum();
    let s: f64 = a
        .iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q))
        .map(|(x, y)| (x - y).abs())
        .sum();
    s / n as f64
}

/// `sum_l [ L1(O_l, GT) + (1 - SSIM(O_l, GT)) ]` with L1 as mean absolute error.
pub fn rec_loss(outputs: &[PlanarImage; 3], gt: &PlanarImage) -> Result<f64> {
    outputs.iter().try_fold(0.0, |acc, o| {
        o.check_same_shape(gt)?;
        Ok(acc + mean_abs_error(o.planes(), gt.planes()) + (1.0 - ssim(o, gt)?))
    })
}

/// Global prior term: mean absolute error between `projection(prior_pred)`
/// and the pooled prior of `gt` on `prior_pred`'s grid.
pub fn prior_loss(
    prior_pred: &FeatureMap,
    gt: &PlanarImage,
    projection: Option<&LinearMap>,
) -> Result<f64> {
    let projected = match projection {
        Some(p) => prior_pred.map_pixels(p)?,
        None => prior_pred.clone(),
    };
    let target = aap(
        &FeatureMap::from(gt.clone()),
        (prior_pred.height(), prior_pred.width()),
    )?;
    if !projected.same_shape(&target) {
        return Err(Error::DimensionMismatch(format!(
            "prior {}x{}x{} vs pooled GT {}x{}x{}",
            projected.height(),
            projected.width(),
            projected.channels(),
            target.height(),
            target.width(),
            target.channels()
        )));
    }
    Ok(mean_abs_error(projected.planes(), target.planes()))
}

/// Components of the total objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub rec: f64,
    pub prior: f64,
    pub l_zf: f64,
    pub l_lf: f64,
    pub l_hf: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.rec + self.prior + self.l_zf + self.l_lf + self.l_hf
    }
}

/// `rec + L_g + L_zf(O1) + L_lf(O2, k) + L_hf(O3, k)`.
pub fn loss_breakdown(
    outputs: &[PlanarImage; 3],
    gt: &PlanarImage,
    prior_pred: &FeatureMap,
    projection: Option<&LinearMap>,
    k: usize,
) -> Result<LossBreakdown> {
    Ok(LossBreakdown {
        rec: rec_loss(outputs, gt)?,
        prior: prior_loss(prior_pred, gt, projection)?,
        l_zf: l_zf(&outputs[0], gt)?,
        l_lf: l_lf(&outputs[1], gt, k)?,
        l_hf: l_hf(&outputs[2], gt, k)?,
    })
}

pub fn total_loss(
    outputs: &[PlanarImage; 3],
    gt: &PlanarImage,
    prior_pred: &FeatureMap,
    projection: Option<&LinearMap>,
    k: usize,
) -> Result<f64> {
    Ok(loss_breakdown(outputs, gt, prior_pred, projection, k)?.total())
}

/// One row of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub path: String,
    #[serde(with = "crate::serde_inf")]
    pub psnr: f64,
    pub ssim: f64,
    #[serde(with = "crate::serde_inf")]
    pub zf_psnr: f64,
    pub l_zf: f64,
    pub l_lf: f64,
    pub l_hf: f64,
    pub k: usize,
}

/// All metrics for a restored/reference pair. SSIM is reported as NaN for
/// images smaller than the SSIM window.
pub fn evaluate_pair(
    path: impl Into<String>,
    restored: &PlanarImage,
    gt: &PlanarImage,
    k: usize,
) -> Result<MetricsRecord> {
    restored.check_same_shape(gt)?;
    let (sa, sb) = (dct2(restored), dct2(gt));
    let (h, w) = (gt.height(), gt.width());
    let ssim = match ssim(restored, gt) {
        Ok(v) => v,
        Err(Error::ImageTooSmall { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(MetricsRecord {
        path: path.into(),
        psnr: psnr(restored, gt)?,
        ssim,
        zf_psnr: zf_psnr(restored, gt)?,
        l_zf: band_l1_spectra(&sa, &sb, &BandMask::zero(h, w)?)?,
        l_lf: band_l1_spectra(&sa, &sb, &BandMask::low(k, h, w)?)?,
        l_hf: band_l1_spectra(&sa, &sb, &BandMask::high(k, h, w)?)?,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::ColorSpace;

    fn luma(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> PlanarImage {
        PlanarImage::from_fn(w, h, ColorSpace::Luma, |_, x, y| f(x, y)).unwrap()
    }

    #[test]
    fn psnr_basics() {
        let a = luma(8, 8, |x, y| (x + y) as f64 / 16.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        let c = luma(8, 8, |x, _| x as f64 / 255.0);
        let d = c.map(|v| v + 1.0 / 255.0);
        assert!((psnr(&c, &d).unwrap() - 48.1308).abs() < 0.01);
        assert!(psnr(&a, &luma(8, 7, |_, _| 0.0)).is_err());
    }

    #[test]
    fn ssim_self_and_inverse() {
        let a = luma(32, 32, |x, y| if (x / 4 + y / 4) % 2 == 0 { 0.95 } else { 0.05 });
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        let inv = a.map(|v| 1.0 - v);
        assert!(ssim(&a, &inv).unwrap() < 0.5);
        assert!(matches!(ssim(&luma(10, 20, |_, _| 0.0), &luma(10, 20, |_, _| 0.0)), Err(Error::ImageTooSmall { .. })));
    }

    #[test]
    fn offset_band_terms() {
        let a = PlanarImage::new(2, 2, ColorSpace::Luma, vec![vec![0.1, 0.4, 0.7, 0.2]]).unwrap();
        let b = a.map(|v| v + 0.1);
        assert!((l_zf(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert!(l_lf(&a, &b, 1).unwrap() < 1e-15);
        assert!(l_hf(&a, &b, 1).unwrap() < 1e-15);
    }

    #[test]
    fn zf_psnr_cases() {
        let a = luma(4, 4, |x, y| if (x + y) % 2 == 0 { 0.25 } else { 0.75 });
        let b = luma(4, 4, |_, _| 0.5);
        assert_eq!(zf_psnr(&a, &b).unwrap(), f64::INFINITY);
        let c = luma(4, 4, |_, _| 0.6);
        assert!((zf_psnr(&b, &c).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn evaluate_identical() {
        let a = luma(16, 16, |x, y| ((x * y) % 7) as f64 / 7.0);
        let r = evaluate_pair("a.png", &a, &a, 4).unwrap();
        assert_eq!((r.psnr, r.ssim, r.zf_psnr), (f64::INFINITY, 1.0, f64::INFINITY));
        assert_eq!((r.l_zf, r.l_lf, r.l_hf), (0.0, 0.0, 0.0));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"psnr\":\"inf\""));
    }

    #[test]
    fn zero_total_loss_at_gt() {
        let gt = PlanarImage::from_fn(32, 32, ColorSpace::Rgb, |c, x, y| ((c + x * y) % 9) as f64 / 9.0).unwrap();
        let prior = aap(&FeatureMap::from(gt.clone()), (2, 2)).unwrap();
        let outs = [gt.clone(), gt.clone(), gt.clone()];
        assert_eq!(total_loss(&outs, &gt, &prior, None, 4).unwrap(), 0.0);
        let proj = LinearMap::identity(3);
        assert_eq!(total_loss(&outs, &gt, &prior, Some(&proj), 4).unwrap(), 0.0);
        let bad = FeatureMap::filled(2, 2, 2, 0.0).unwrap();
        assert!(total_loss(&outs, &gt, &bad, None, 4).is_err());
    }
}

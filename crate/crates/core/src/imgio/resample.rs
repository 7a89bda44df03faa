//! Full-resolution evaluation strategies: resize (down, restore, up) and
//! stitch (split into a patch grid, restore each patch, reassemble).

use serde::{Deserialize, Serialize};

use super::PlanarImage;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    #[default]
    Bilinear,
    Bicubic,
}

/// Patch layout, `rows x cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
}

impl Grid {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn count(&self) -> usize {
        self.rows * self.cols
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidSpec(format!(
                "grid {}x{} must be at least 1x1",
                self.rows, self.cols
            )));
        }
        if width % self.cols != 0 || height % self.rows != 0 {
            return Err(Error::IndivisibleDimensions {
                width,
                height,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ResampleSpec {
    Resize { factor: usize, filter: Filter },
    Stitch { grid: Grid },
}

impl ResampleSpec {
    /// The 2x bilinear resize strategy.
    pub fn resize2() -> Self {
        ResampleSpec::Resize {
            factor: 2,
            filter: Filter::Bilinear,
        }
    }

    /// The four-patch (2x2) stitch strategy.
    pub fn stitch4() -> Self {
        ResampleSpec::Stitch {
            grid: Grid::new(2, 2),
        }
    }
}

/// Runs `restore` under the given evaluation strategy. Output has the input's shape.
pub fn resample<F>(img: &PlanarImage, spec: &ResampleSpec, restore: F) -> Result<PlanarImage>
where
    F: Fn(&PlanarImage) -> Result<PlanarImage>,
{
    match *spec {
        ResampleSpec::Resize { factor, filter } => {
            if factor == 0 {
                return Err(Error::InvalidSpec("resize factor must be >= 1".into()));
            }
            let small_w = img.width().div_ceil(factor);
            let small_h = img.height().div_ceil(factor);
            let small = resize(img, small_w, small_h, filter)?;
            let restored = restore(&small)?;
            if !restored.same_shape(&small) {
                return Err(Error::CallbackShapeMismatch(format!(
                    "{}x{} in, {}x{} out",
                    small.width(),
                    small.height(),
                    restored.width(),
                    restored.height()
                )));
            }
            resize(&restored, img.width(), img.height(), filter)
        }
        ResampleSpec::Stitch { grid } => {
            let patches = split_patches(img, grid)?;
            let restored = patches
                .iter()
                .map(|p| {
                    let out = restore(p)?;
                    if out.same_shape(p) {
                        Ok(out)
                    } else {
                        Err(Error::CallbackShapeMismatch(format!(
                            "{}x{} in, {}x{} out",
                            p.width(),
                            p.height(),
                            out.width(),
                            out.height()
                        )))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            stitch_patches(&restored, grid)
        }
    }
}

/// Splits into `grid.rows * grid.cols` equal patches in row-major order.
pub fn split_patches(img: &PlanarImage, grid: Grid) -> Result<Vec<PlanarImage>> {
    grid.check(img.width(), img.height())?;
    let pw = img.width() / grid.cols;
    let ph = img.height() / grid.rows;
    let mut out = Vec::with_capacity(grid.count());
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let planes = img
                .planes()
                .iter()
                .map(|plane| {
                    let mut p = Vec::with_capacity(pw * ph);
                    for y in r * ph..(r + 1) * ph {
                        let row = y * img.width() + c * pw;
                        p.extend_from_slice(&plane[row..row + pw]);
                    }
                    p
                })
                .collect();
            out.push(PlanarImage::new(pw, ph, img.colorspace(), planes)?);
        }
    }
    Ok(out)
}

/// Inverse of [`split_patches`].
pub fn stitch_patches(patches: &[PlanarImage], grid: Grid) -> Result<PlanarImage> {
    if grid.rows == 0 || grid.cols == 0 {
        return Err(Error::InvalidSpec("grid must be at least 1x1".into()));
    }
    if patches.len() != grid.count() {
        return Err(Error::PatchCountMismatch {
            expected: grid.count(),
            actual: patches.len(),
        });
    }
    let first = &patches[0];
    if let Some(p) = patches.iter().find(|p| !p.same_shape(first)) {
        return Err(Error::DimensionMismatch(format!(
            "patch {}x{} differs from {}x{}",
            p.width(),
            p.height(),
            first.width(),
            first.height()
        )));
    }
    let (pw, ph) = (first.width(), first.height());
    let width = pw * grid.cols;
    let height = ph * grid.rows;
    let planes = (0..first.channels())
        .map(|ch| {
            let mut plane = vec![0.0; width * height];
            for (idx, patch) in patches.iter().enumerate() {
                let (r, c) = (idx / grid.cols, idx % grid.cols);
                let src = patch.plane(ch);
                for y in 0..ph {
                    let dst = (r * ph + y) * width + c * pw;
                    plane[dst..dst + pw].copy_from_slice(&src[y * pw..(y + 1) * pw]);
                }
            }
            plane
        })
        .collect();
    PlanarImage::new(width, height, first.colorspace(), planes)
}

/// Separable resize with half-pixel-centre alignment and replicated borders.
///
/// Interpolation is written in difference form so constant regions are
/// reproduced exactly.
pub fn resize(
    img: &PlanarImage,
    width: usize,
    height: usize,
    filter: Filter,
) -> Result<PlanarImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidSpec(format!("target size {width}x{height}")));
    }
    let planes = img
        .planes()
        .iter()
        .map(|p| {
            let rows = resize_axis(p, img.width(), img.height(), width, filter, true);
            resize_axis(&rows, width, img.height(), height, filter, false)
        })
        .collect();
    PlanarImage::new(width, height, img.colorspace(), planes)
}

/// Resamples along x (`horizontal`) or y. `w`,`h` describe the source.
fn resize_axis(
    src: &[f64],
    w: usize,
    h: usize,
    target: usize,
    filter: Filter,
    horizontal: bool,
) -> Vec<f64> {
    let n = if horizontal { w } else { h };
    let (out_w, out_h) = if horizontal { (target, h) } else { (w, target) };
    let scale = n as f64 / target as f64;
    let taps: Vec<(isize, f64)> = (0..target)
        .map(|i| {
            let pos = (i as f64 + 0.5) * scale - 0.5;
            let base = pos.floor();
            (base as isize, pos - base)
        })
        .collect();
    let at = |line: usize, idx: isize| -> f64 {
        let k = idx.clamp(0, n as isize - 1) as usize;
        if horizontal {
            src[line * w + k]
        } else {
            src[k * w + line]
        }
    };
    let mut out = vec![0.0; out_w * out_h];
    let lines = if horizontal { h } else { w };
    for line in 0..lines {
        for (i, &(base, t)) in taps.iter().enumerate() {
            let v = match filter {
                Filter::Bilinear => {
                    let a = at(line, base);
                    let b = at(line, base + 1);
                    a + t * (b - a)
                }
                Filter::Bicubic => {
                    let p0 = at(line, base - 1);
                    let p1 = at(line, base);
                    let p2 = at(line, base + 1);
                    let p3 = at(line, base + 2);
                    // Catmull-Rom (Keys, a = -0.5) in difference form.
                    let d3 = 3.0 * (p1 - p2) + (p3 - p0);
                    let d2 = 2.0 * (p0 - p1) - 3.0 * (p1 - p2) + (p2 - p3);
                    p1 + 0.5 * t * ((p2 - p0) + t * (d2 + t * d3))
                }
            };
            if horizontal {
                out[line * out_w + i] = v;
            } else {
                out[i * out_w + line] = v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::ColorSpace;

    fn ramp(w: usize, h: usize) -> PlanarImage {
        PlanarImage::from_fn(w, h, ColorSpace::Rgb, |c, x, y| (c + x * 3 + y * 11) as f64 / 255.0)
            .unwrap()
    }

    #[test]
    fn split_4x4_row_major() {
        let img = PlanarImage::from_fn(4, 4, ColorSpace::Luma, |_, x, y| (y * 4 + x) as f64).unwrap();
        let patches = split_patches(&img, Grid::new(2, 2)).unwrap();
        assert_eq!(patches.len(), 4);
        assert_eq!(patches[0].plane(0), &[0.0, 1.0, 4.0, 5.0]);
        assert_eq!(patches[1].plane(0), &[2.0, 3.0, 6.0, 7.0]);
        assert_eq!(patches[2].plane(0), &[8.0, 9.0, 12.0, 13.0]);
        assert_eq!(patches[3].plane(0), &[10.0, 11.0, 14.0, 15.0]);
    }

    #[test]
    fn grid_1x1_is_identity() {
        let img = ramp(6, 5);
        let patches = split_patches(&img, Grid::new(1, 1)).unwrap();
        assert_eq!(patches, vec![img.clone()]);
        assert_eq!(stitch_patches(&patches, Grid::new(1, 1)).unwrap(), img);
    }

    #[test]
    fn indivisible_rejected() {
        let img = ramp(5, 4);
        assert!(matches!(
            split_patches(&img, Grid::new(2, 2)),
            Err(Error::IndivisibleDimensions { .. })
        ));
    }

    #[test]
    fn wrong_patch_count() {
        let img = ramp(4, 4);
        let mut patches = split_patches(&img, Grid::new(2, 2)).unwrap();
        patches.pop();
        assert!(matches!(
            stitch_patches(&patches, Grid::new(2, 2)),
            Err(Error::PatchCountMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn stitch_identity_callback() {
        let img = ramp(8, 6);
        let out = resample(&img, &ResampleSpec::stitch4(), |p| Ok(p.clone())).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn constant_preserved_both_modes() {
        let img = PlanarImage::filled(9, 7, ColorSpace::Rgb, 0.37).unwrap();
        for spec in [
            ResampleSpec::resize2(),
            ResampleSpec::Resize { factor: 3, filter: Filter::Bicubic },
        ] {
            assert_eq!(resample(&img, &spec, |p| Ok(p.clone())).unwrap(), img);
        }
        let even = PlanarImage::filled(8, 6, ColorSpace::Rgb, 0.37).unwrap();
        assert_eq!(resample(&even, &ResampleSpec::stitch4(), |p| Ok(p.clone())).unwrap(), even);
    }

    #[test]
    fn callback_shape_checked() {
        let img = ramp(8, 8);
        let shrink = |p: &PlanarImage| resize(p, 1, 1, Filter::Bilinear);
        assert!(matches!(
            resample(&img, &ResampleSpec::stitch4(), shrink),
            Err(Error::CallbackShapeMismatch(_))
        ));
        assert!(matches!(
            resample(&img, &ResampleSpec::resize2(), shrink),
            Err(Error::CallbackShapeMismatch(_))
        ));
    }

    #[test]
    fn factor_two_bilinear_down_is_pair_average() {
        let img = PlanarImage::from_fn(4, 2, ColorSpace::Luma, |_, x, y| (x + 4 * y) as f64).unwrap();
        let small = resize(&img, 2, 1, Filter::Bilinear).unwrap();
        assert_eq!(small.plane(0), &[2.5, 4.5]);
    }

    #[test]
    fn zero_factor_rejected() {
        let spec = ResampleSpec::Resize { factor: 0, filter: Filter::Bilinear };
        assert!(resample(&ramp(4, 4), &spec, |p| Ok(p.clone())).is_err());
    }
}

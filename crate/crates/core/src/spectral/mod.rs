//! Orthonormal 2-D DCT, band masks and exchanges, zigzag reordering and
//! spectral windowing.
//!
//! Coefficient `(i, j)` is stored at `plane[i * width + j]`, `i` being the
//! vertical frequency. The transform is orthonormal, so total coefficient
//! energy equals total pixel energy and the DC coefficient is
//! `mean * sqrt(height * width)`.

mod band;
mod dct;
mod window;
mod zigzag;

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::imgio::{ColorSpace, PlanarImage};

pub use band::{BandKind, BandMask, FrequencyCutoff};
pub use dct::{Dct2dPlan, DctStrategy, NAIVE_MAX_LEN};
pub use window::{window_partition, window_reverse, WindowPartition};
pub use zigzag::{apply_zigzag, invert_zigzag, zigzag_order, ZigzagOrder};

/// Default tile edge for the tiled (block) transform.
pub const DEFAULT_TILE: usize = 512;

/// DCT coefficient planes aligned 1:1 with a source image.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    /// Colour space of the image this came from; carried back by [`idct2`].
    origin: ColorSpace,
    planes: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn new(
        width: usize,
        height: usize,
        origin: ColorSpace,
        planes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || planes.is_empty() {
            return Err(Error::InvalidImage(format!(
                "empty {width}x{height}x{} spectrum",
                planes.len()
            )));
        }
        if planes.iter().any(|p| p.len() != width * height) {
            return Err(Error::InvalidImage("spectrum plane size mismatch".into()));
        }
        Ok(Self {
            width,
            height,
            origin,
            planes,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::new(
            width,
            height,
            ColorSpace::Feature,
            vec![vec![0.0; width * height]; channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn origin(&self) -> ColorSpace {
        self.origin
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        &mut self.planes[channel]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    #[inline]
    pub fn coeff(&self, channel: usize, i: usize, j: usize) -> f64 {
        self.planes[channel][i * self.width + j]
    }

    /// Sum of squared coefficients over all channels.
    pub fn energy(&self) -> f64 {
        self.planes.iter().flatten().map(|v| v * v).sum()
    }

    pub fn same_shape(&self, other: &Spectrum) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels() == other.channels()
    }

    pub(crate) fn check_same_shape(&self, other: &Spectrum) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "spectrum {}x{}x{} vs {}x{}x{}",
                self.height,
                self.width,
                self.channels(),
                other.height,
                other.width,
                other.channels()
            )))
        }
    }

    /// Copy with every coefficient outside `mask` set to zero.
    pub fn masked(&self, mask: &BandMask) -> Result<Spectrum> {
        self.check_mask(mask)?;
        let idx = mask.indices();
        let planes = self
            .planes
            .iter()
            .map(|p| {
                let mut out = vec![0.0; p.len()];
                for &i in &idx {
                    out[i] = p[i];
                }
                out
            })
            .collect();
        Spectrum::new(self.width, self.height, self.origin, planes)
    }

    pub(crate) fn check_mask(&self, mask: &BandMask) -> Result<()> {
        if (mask.height, mask.width) != (self.height, self.width) {
            return Err(Error::DimensionMismatch(format!(
                "mask {}x{} vs spectrum {}x{}",
                mask.height, mask.width, self.height, self.width
            )));
        }
        Ok(())
    }
}

/// Forward orthonormal DCT-II of every channel.
pub fn dct2(img: &PlanarImage) -> Spectrum {
    dct2_with(img, DctStrategy::Auto)
}

pub fn dct2_with(img: &PlanarImage, strategy: DctStrategy) -> Spectrum {
    let plan = Dct2dPlan::new(img.height(), img.width(), strategy);
    let planes = img.planes().iter().map(|p| plan.forward(p)).collect();
    Spectrum {
        width: img.width(),
        height: img.height(),
        origin: img.colorspace(),
        planes,
    }
}

/// Inverse transform. The output carries the spectrum's origin colour space
/// (or `Feature` when the channel count does not fit it).
pub fn idct2(spec: &Spectrum) -> Result<PlanarImage> {
    idct2_with(spec, DctStrategy::Auto)
}

pub fn idct2_with(spec: &Spectrum, strategy: DctStrategy) -> Result<PlanarImage> {
    let plan = Dct2dPlan::new(spec.height, spec.width, strategy);
    let planes: Vec<Vec<f64>> = spec.planes.iter().map(|p| plan.inverse(p)).collect();
    to_image(spec.width, spec.height, spec.origin, planes)
}

fn to_image(
    width: usize,
    height: usize,
    origin: ColorSpace,
    planes: Vec<Vec<f64>>,
) -> Result<PlanarImage> {
    let colorspace = match (origin, planes.len()) {
        (ColorSpace::Rgb, 3) | (ColorSpace::Luma, 1) => origin,
        _ => ColorSpace::Feature,
    };
    PlanarImage::new(width, height, colorspace, planes)
}

/// Block transform over `tile x tile` tiles (edge tiles may be smaller).
///
/// Not equivalent to [`dct2`]: each tile is transformed independently, which
/// bounds the working set for very large planes.
pub fn dct2_tiled(img: &PlanarImage, tile: usize) -> Result<Spectrum> {
    let planes = tiled(img.planes(), img.width(), img.height(), tile, true)?;
    Spectrum::new(img.width(), img.height(), img.colorspace(), planes)
}

/// Inverse of [`dct2_tiled`] for the same tile size.
pub fn idct2_tiled(spec: &Spectrum, tile: usize) -> Result<PlanarImage> {
    let planes = tiled(&spec.planes, spec.width, spec.height, tile, false)?;
    to_image(spec.width, spec.height, spec.origin, planes)
}

fn tiled(
    planes: &[Vec<f64>],
    width: usize,
    height: usize,
    tile: usize,
    forward: bool,
) -> Result<Vec<Vec<f64>>> {
    if tile == 0 {
        return Err(Error::InvalidSpec("tile size must be >= 1".into()));
    }
    let mut out: Vec<Vec<f64>> = planes.iter().map(|p| vec![0.0; p.len()]).collect();
    for ty in (0..height).step_by(tile) {
        let th = tile.min(height - ty);
        for tx in (0..width).step_by(tile) {
            let tw = tile.min(width - tx);
            let plan = Dct2dPlan::new(th, tw, DctStrategy::Auto);
            for (src, dst) in planes.iter().zip(out.iter_mut()) {
                let mut block = Vec::with_capacity(tw * th);
                for y in ty..ty + th {
                    block.extend_from_slice(&src[y * width + tx..y * width + tx + tw]);
                }
                let res = if forward {
                    plan.forward(&block)
                } else {
                    plan.inverse(&block)
                };
                for (r, y) in (ty..ty + th).enumerate() {
                    dst[y * width + tx..y * width + tx + tw]
                        .copy_from_slice(&res[r * tw..(r + 1) * tw]);
                }
            }
        }
    }
    Ok(out)
}

/// Swaps the coefficients inside `mask` between `a` and `b`.
pub fn exchange_band(a: &Spectrum, b: &Spectrum, mask: &BandMask) -> Result<(Spectrum, Spectrum)> {
    a.check_same_shape(b)?;
    a.check_mask(mask)?;
    let (mut a2, mut b2) = (a.clone(), b.clone());
    let idx = mask.indices();
    for (pa, pb) in a2.planes.iter_mut().zip(b2.planes.iter_mut()) {
        for &i in &idx {
            std::mem::swap(&mut pa[i], &mut pb[i]);
        }
    }
    Ok((a2, b2))
}

/// Image rebuilt from the DC coefficient alone: per channel, the constant
/// `DC / sqrt(height * width)`.
pub fn dc_reconstruct(spec: &Spectrum) -> Result<PlanarImage> {
    let n = spec.width * spec.height;
    let norm = (n as f64).sqrt();
    let planes = spec.planes.iter().map(|p| vec![p[0] / norm; n]).collect();
    to_image(spec.width, spec.height, spec.origin, planes)
}

const SPEC_MAGIC: &[u8; 4] = b"SPEC";

/// Writes the flat binary dump: `"SPEC"`, `u32` H, W, C (little endian), then
/// every channel's coefficients as little-endian `f32`, row-major.
pub fn write_spectrum(spec: &Spectrum, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(SPEC_MAGIC)?;
    for dim in [spec.height, spec.width, spec.channels()] {
        out.write_all(&(dim as u32).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(spec.width * spec.height * 4);
    for plane in &spec.planes {
        buf.clear();
        for &v in plane {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a dump written by [`write_spectrum`]. The origin is reported as `Feature`.
pub fn read_spectrum(mut input: impl Read) -> Result<Spectrum> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|e| Error::MalformedSpectrum(format!("header: {e}")))?;
    if &header[..4] != SPEC_MAGIC {
        return Err(Error::MalformedSpectrum("bad magic".into()));
    }
    let dim = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let (h, w, c) = (dim(4), dim(8), dim(12));
    let mut planes = Vec::with_capacity(c);
    let mut raw = vec![0u8; w * h * 4];
    for _ in 0..c {
        input
            .read_exact(&mut raw)
            .map_err(|e| Error::MalformedSpectrum(format!("payload: {e}")))?;
        planes.push(
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
                .collect(),
        );
    }
    Spectrum::new(w, h, ColorSpace::Feature, planes)
}

//! Planar floating-point rasters, PNG/PNM I/O and luma conversion.
//!
//! Every pixel container in the crate is a [`PlanarImage`]: one `Vec<f64>` per
//! channel, row-major, nominal range `[0, 1]` for RGB and luma data.

mod resample;

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use resample::{resample, resize, split_patches, stitch_patches, Filter, Grid, ResampleSpec};

/// Colour interpretation of the planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    Rgb,
    Luma,
    /// Unbounded feature planes (spectral reconstructions, network activations).
    Feature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    colorspace: ColorSpace,
    planes: Vec<Vec<f64>>,
}

impl PlanarImage {
    pub fn new(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        planes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty {width}x{height} image")));
        }
        match (planes.len(), colorspace) {
            (3, ColorSpace::Rgb) | (1, ColorSpace::Luma) | (1, ColorSpace::Feature) => {}
            (3, ColorSpace::Feature) => {}
            (n, cs) => {
                return Err(Error::InvalidImage(format!(
                    "{n} channel(s) incompatible with {cs:?}"
                )))
            }
        }
        if let Some(p) = planes.iter().find(|p| p.len() != width * height) {
            return Err(Error::InvalidImage(format!(
                "plane has {} samples, expected {}",
                p.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            colorspace,
            planes,
        })
    }

    /// Image with every sample of every channel set to `value`.
    pub fn filled(width: usize, height: usize, colorspace: ColorSpace, value: f64) -> Result<Self> {
        let channels = match colorspace {
            ColorSpace::Rgb => 3,
            _ => 1,
        };
        Self::new(
            width,
            height,
            colorspace,
            vec![vec![value; width * height]; channels],
        )
    }

    /// Builds an image from `f(channel, x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let channels = match colorspace {
            ColorSpace::Rgb => 3,
            _ => 1,
        };
        let planes = (0..channels)
            .map(|c| {
                (0..width * height)
                    .map(|i| f(c, i % width, i / width))
                    .collect()
            })
            .collect();
        Self::new(width, height, colorspace, planes)
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

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Vec<f64>> {
        self.planes
    }

    #[inline]
    pub fn get(&self, channel: usize, x: usize, y: usize) -> f64 {
        self.planes[channel][y * self.width + x]
    }

    pub fn same_shape(&self, other: &PlanarImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels() == other.channels()
    }

    pub(crate) fn check_same_shape(&self, other: &PlanarImage) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width,
                self.height,
                self.channels(),
                other.width,
                other.height,
                other.channels()
            )))
        }
    }

    /// Returns a copy tagged with another colour space of the same arity.
    pub fn with_colorspace(mut self, colorspace: ColorSpace) -> Result<Self> {
        let planes = std::mem::take(&mut self.planes);
        Self::new(self.width, self.height, colorspace, planes)
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            planes: self
                .planes
                .iter()
                .map(|p| p.iter().map(|&v| f(v)).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// Clamps all samples into `[0, 1]`.
    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }
}

/// Loads a PNG or binary PNM (P5/P6) file.
///
/// 8-bit samples are mapped to `v / 255`, 16-bit samples to `v / 65535`.
/// Alpha channels are discarded.
pub fn load_image(path: impl AsRef<Path>) -> Result<PlanarImage> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decodes PNG or PNM bytes. See [`load_image`].
pub fn decode_image(bytes: &[u8]) -> Result<PlanarImage> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::CorruptData(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
        None => return Err(Error::UnsupportedFormat("unrecognised signature".into())),
    }
    let dynamic = reader
        .decode()
        .map_err(|e| Error::CorruptData(e.to_string()))?;
    from_dynamic(dynamic)
}

pub(crate) fn from_dynamic(img: DynamicImage) -> Result<PlanarImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            let plane = buf.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
            PlanarImage::new(w, h, ColorSpace::Luma, vec![plane])
        }
        DynamicImage::ImageLumaA8(_) => from_dynamic(DynamicImage::ImageLuma8(img.to_luma8())),
        DynamicImage::ImageLuma16(buf) => {
            let plane = buf.as_raw().iter().map(|&v| v as f64 / 65535.0).collect();
            PlanarImage::new(w, h, ColorSpace::Luma, vec![plane])
        }
        DynamicImage::ImageLumaA16(_) => {
            from_dynamic(DynamicImage::ImageLuma16(img.to_luma16()))
        }
        DynamicImage::ImageRgb8(buf) => {
            PlanarImage::new(w, h, ColorSpace::Rgb, deinterleave(buf.as_raw(), 255.0))
        }
        DynamicImage::ImageRgb16(buf) => {
            PlanarImage::new(w, h, ColorSpace::Rgb, deinterleave(buf.as_raw(), 65535.0))
        }
        DynamicImage::ImageRgba16(_) => from_dynamic(DynamicImage::ImageRgb16(img.to_rgb16())),
        other => from_dynamic(DynamicImage::ImageRgb8(other.to_rgb8())),
    }
}

fn deinterleave<T: Copy + Into<f64>>(raw: &[T], scale: f64) -> Vec<Vec<f64>> {
    let mut planes = vec![Vec::with_capacity(raw.len() / 3); 3];
    for px in raw.chunks_exact(3) {
        for (plane, &v) in planes.iter_mut().zip(px) {
            plane.push(v.into() / scale);
        }
    }
    planes
}

#[inline]
pub(crate) fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Interleaved 8-bit samples (RGB or gray), clamped and rounded.
pub(crate) fn to_u8_interleaved(img: &PlanarImage) -> Vec<u8> {
    let n = img.width() * img.height();
    let c = img.channels();
    let mut out = Vec::with_capacity(n * c);
    for i in 0..n {
        for p in img.planes() {
            out.push(quantize_u8(p[i]));
        }
    }
    out
}

pub(crate) fn to_dynamic(img: &PlanarImage) -> Result<DynamicImage> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let raw = to_u8_interleaved(img);
    let corrupt = || Error::CorruptData("buffer size mismatch".into());
    Ok(match img.channels() {
        1 => DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, raw).ok_or_else(corrupt)?),
        3 => DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, raw).ok_or_else(corrupt)?),
        n => {
            return Err(Error::WrongChannelCount {
                expected: 3,
                actual: n,
            })
        }
    })
}

/// Saves an 8-bit PNG, PGM or PPM chosen by extension (`.png`, `.pgm`, `.ppm`, `.pnm`).
///
/// Samples are clamped to `[0, 1]` and rounded to the nearest 8-bit level, so
/// `load_image(save_image(img))` is exact for 8-bit-quantized inputs.
pub fn save_image(img: &PlanarImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let format = match ext.as_str() {
        "png" => ImageFormat::Png,
        "pgm" | "ppm" | "pnm" => ImageFormat::Pnm,
        other => return Err(Error::UnsupportedFormat(format!("extension {other:?}"))),
    };
    if ext == "pgm" && img.channels() != 1 {
        return Err(Error::WrongChannelCount {
            expected: 1,
            actual: img.channels(),
        });
    }
    if ext == "ppm" && img.channels() != 3 {
        return Err(Error::WrongChannelCount {
            expected: 3,
            actual: img.channels(),
        });
    }
    let mut bytes = Vec::new();
    to_dynamic(img)?
        .write_to(&mut Cursor::new(&mut bytes), format)
        .map_err(|e| Error::Codec(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

const LUMA_R: f64 = 0.299;
const LUMA_B: f64 = 0.114;

/// BT.601 luma, `0.299 R + 0.587 G + 0.114 B`.
pub fn to_luma(img: &PlanarImage) -> Result<PlanarImage> {
    if img.channels() != 3 {
        return Err(Error::WrongChannelCount {
            expected: 3,
            actual: img.channels(),
        });
    }
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    // Written around G so that gray inputs map to themselves exactly.
    let plane = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| (g + LUMA_R * (r - g) + LUMA_B * (b - g)).clamp(0.0, 1.0))
        .collect();
    PlanarImage::new(img.width(), img.height(), ColorSpace::Luma, vec![plane])
}

/// Luma for RGB inputs, pass-through for single-channel inputs.
pub fn ensure_luma(img: &PlanarImage) -> Result<PlanarImage> {
    match img.channels() {
        1 => img.clone().with_colorspace(ColorSpace::Luma),
        _ => to_luma(img),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_planes() {
        assert!(PlanarImage::new(2, 2, ColorSpace::Rgb, vec![vec![0.0; 4]]).is_err());
        assert!(PlanarImage::new(2, 2, ColorSpace::Luma, vec![vec![0.0; 3]]).is_err());
        assert!(PlanarImage::new(0, 2, ColorSpace::Luma, vec![vec![]]).is_err());
    }

    #[test]
    fn luma_weights() {
        let px = |r, g, b| PlanarImage::new(1, 1, ColorSpace::Rgb, vec![vec![r], vec![g], vec![b]]).unwrap();
        assert_eq!(to_luma(&px(1.0, 1.0, 1.0)).unwrap().plane(0)[0], 1.0);
        assert_eq!(to_luma(&px(0.0, 0.0, 0.0)).unwrap().plane(0)[0], 0.0);
        assert!((to_luma(&px(1.0, 0.0, 0.0)).unwrap().plane(0)[0] - 0.299).abs() < 1e-15);
        assert!((to_luma(&px(0.0, 1.0, 0.0)).unwrap().plane(0)[0] - 0.587).abs() < 1e-15);
        assert!((to_luma(&px(0.0, 0.0, 1.0)).unwrap().plane(0)[0] - 0.114).abs() < 1e-15);
    }

    #[test]
    fn luma_needs_rgb() {
        let gray = PlanarImage::filled(2, 2, ColorSpace::Luma, 0.5).unwrap();
        assert!(matches!(
            to_luma(&gray),
            Err(Error::WrongChannelCount { expected: 3, actual: 1 })
        ));
    }

    #[test]
    fn luma_idempotent_on_replicated_gray() {
        let gray = PlanarImage::from_fn(7, 5, ColorSpace::Luma, |_, x, y| ((x * 31 + y * 17) % 256) as f64 / 255.0).unwrap();
        let rgb = PlanarImage::new(7, 5, ColorSpace::Rgb, vec![gray.plane(0).to_vec(); 3]).unwrap();
        assert_eq!(to_luma(&rgb).unwrap(), gray);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_image("/nonexistent/definitely/not/here.png"),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn unsupported_bytes() {
        assert!(matches!(
            decode_image(b"GIF89a\x01\x00\x01\x00"),
            Err(Error::UnsupportedFormat(_)) | Err(Error::CorruptData(_))
        ));
        assert!(matches!(decode_image(b"nonsense"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn single_pixel_png_scale() {
        let dir = tempfile::tempdir().unwrap();
        for (v, expect) in [(255u8, 1.0), (0u8, 0.0)] {
            let path = dir.path().join(format!("p{v}.png"));
            image::GrayImage::from_raw(1, 1, vec![v]).unwrap().save(&path).unwrap();
            let img = load_image(&path).unwrap();
            assert_eq!((img.width(), img.height(), img.channels()), (1, 1, 1));
            assert_eq!(img.plane(0)[0], expect);
        }
    }

    #[test]
    fn sixteen_bit_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p16.png");
        image::ImageBuffer::<image::Luma<u16>, _>::from_raw(2, 1, vec![65535u16, 32768])
            .unwrap()
            .save(&path)
            .unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.plane(0), &[1.0, 32768.0 / 65535.0]);
    }

    #[test]
    fn pnm_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let rgb = PlanarImage::from_fn(5, 3, ColorSpace::Rgb, |c, x, y| ((c * 50 + x * 20 + y * 7) % 256) as f64 / 255.0).unwrap();
        let gray = to_luma(&rgb).unwrap().map(|v| (v * 255.0).round() / 255.0);
        save_image(&rgb, dir.path().join("a.ppm")).unwrap();
        save_image(&gray, dir.path().join("a.pgm")).unwrap();
        assert_eq!(load_image(dir.path().join("a.ppm")).unwrap(), rgb);
        assert_eq!(load_image(dir.path().join("a.pgm")).unwrap(), gray);
        assert!(save_image(&rgb, dir.path().join("a.pgm")).is_err());
        assert!(matches!(save_image(&rgb, dir.path().join("a.bmp")), Err(Error::UnsupportedFormat(_))));
    }
}

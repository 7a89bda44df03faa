//! Benchmark synthesis: seeded Gaussian noise, JPEG round trips and paired
//! train/val/test layouts built from a curation manifest.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curation::CurationManifest;
use crate::error::{Error, Result};
use crate::imgio::{from_dynamic, load_image, save_image, to_u8_interleaved, ColorSpace, PlanarImage};

pub const INDEX_VERSION: u32 = 1;

/// Split sizes of the reference UHD corpus.
pub const REFERENCE_SPLITS: (usize, usize, usize) = (80_126, 1_000, 1_000);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegradationSpec {
    /// `sigma` on the 8-bit scale.
    GaussianNoise { sigma: f64 },
    Jpeg { quality: u8 },
}

impl DegradationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DegradationSpec::GaussianNoise { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidDegradation(format!("noise sigma must be positive, got {sigma}")))
            }
            DegradationSpec::Jpeg { quality } if !(1..=100).contains(&quality) => {
                Err(Error::InvalidDegradation(format!("JPEG quality must be 1..=100, got {quality}")))
            }
            _ => Ok(()),
        }
    }

    /// Short name used for directory names, e.g. `noise25` or `jpeg10`.
    pub fn tag(&self) -> String {
        match *self {
            DegradationSpec::GaussianNoise { sigma } => format!("noise{sigma}"),
            DegradationSpec::Jpeg { quality } => format!("jpeg{quality}"),
        }
    }

    /// Whether the output depends on the seed.
    pub fn is_random(&self) -> bool {
        matches!(self, DegradationSpec::GaussianNoise { .. })
    }

    pub fn apply(&self, img: &PlanarImage, seed: u64) -> Result<PlanarImage> {
        self.validate()?;
        match *self {
            DegradationSpec::GaussianNoise { sigma } => add_gaussian_noise(img, sigma, seed),
            DegradationSpec::Jpeg { quality } => jpeg_roundtrip(img, quality),
        }
    }
}

/// Stream seed for one `(global seed, relative path, tag)` triple.
pub fn derive_seed(global: u64, path: &str, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(path.as_bytes());
    h.update([0u8]);
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// `clamp(img + N(0, (sigma/255)^2))`, i.i.d. per sample, channel-major order.
pub fn add_gaussian_noise(img: &PlanarImage, sigma: f64, seed: u64) -> Result<PlanarImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidDegradation(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma / 255.0).map_err(|e| Error::InvalidDegradation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = img
        .planes()
        .iter()
        .map(|p| p.iter().map(|&v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0)).collect())
        .collect();
    PlanarImage::new(img.width(), img.height(), img.colorspace(), planes)
}

/// Encode as baseline JPEG (4:2:0 chroma for colour input) and decode back.
pub fn jpeg_roundtrip(img: &PlanarImage, quality: u8) -> Result<PlanarImage> {
    let bytes = jpeg_encode(img, quality)?;
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Jpeg)
        .map_err(|e| Error::Codec(e.to_string()))?;
    let out = from_dynamic(decoded)?;
    if out.width() != img.width() || out.height() != img.height() {
        return Err(Error::Codec("decoder changed the image size".into()));
    }
    Ok(out)
}

pub fn jpeg_encode(img: &PlanarImage, quality: u8) -> Result<Vec<u8>> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidDegradation(format!("JPEG quality must be 1..=100, got {quality}")));
    }
    let color = match (img.colorspace(), img.channels()) {
        (ColorSpace::Rgb, 3) => jpeg_encoder::ColorType::Rgb,
        (ColorSpace::Luma, 1) => jpeg_encoder::ColorType::Luma,
        _ => {
            return Err(Error::InvalidDegradation(
                "JPEG needs an RGB or luma image".into(),
            ))
        }
    };
    let (w, h) = (
        u16::try_from(img.width()).map_err(|_| Error::Codec("width exceeds 65535".into()))?,
        u16::try_from(img.height()).map_err(|_| Error::Codec("height exceeds 65535".into()))?,
    );
    let mut buf = Vec::new();
    let mut enc = jpeg_encoder::Encoder::new(&mut buf, quality);
    enc.set_sampling_factor(jpeg_encoder::SamplingFactor::R_4_2_0);
    enc.encode(&to_u8_interleaved(img), w, h, color)
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub seed: u64,
    pub specs: Vec<DegradationSpec>,
}

impl BenchmarkSpec {
    /// Splits proportional to the reference corpus for `total` images, with
    /// at least one validation and one test image when `total >= 3`.
    pub fn scaled(total: usize, seed: u64, specs: Vec<DegradationSpec>) -> Self {
        let (rt, rv, rs) = REFERENCE_SPLITS;
        let all = (rt + rv + rs) as f64;
        let part = |r: usize| {
            let v = (total as f64 * r as f64 / all).round() as usize;
            if total >= 3 { v.max(1) } else { v }
        };
        let val = part(rv).min(total);
        let test = part(rs).min(total - val);
        Self {
            train: total - val - test,
            val,
            test,
            seed,
            specs,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::InsufficientSpecs);
        }
        let mut tags = BTreeSet::new();
        for s in &self.specs {
            s.validate()?;
            if !tags.insert(s.tag()) {
                return Err(Error::InvalidDegradation(format!("duplicate degradation {}", s.tag())));
            }
        }
        Ok(())
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradedPair {
    pub tag: String,
    pub spec: DegradationSpec,
    /// Relative to the benchmark root.
    pub path: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub split: Split,
    /// Relative to the corpus root.
    pub source: String,
    pub gt: String,
    pub inputs: Vec<DegradedPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecInfo {
    pub encoder: String,
    pub subsampling: String,
    pub baseline: bool,
}

impl Default for CodecInfo {
    fn default() -> Self {
        Self {
            encoder: "jpeg-encoder 0.6".into(),
            subsampling: "4:2:0".into(),
            baseline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkIndex {
    pub version: u32,
    pub seed: u64,
    pub codec: CodecInfo,
    pub splits: [usize; 3],
    pub specs: Vec<DegradationSpec>,
    pub entries: Vec<IndexEntry>,
}

impl BenchmarkIndex {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn split_sources(&self, split: Split) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.split == split)
            .map(|e| e.source.as_str())
            .collect()
    }
}

/// Shuffle `paths` (sorted first) with `seed` and cut into the three splits.
pub fn assign_splits(paths: &[String], spec: &BenchmarkSpec) -> Result<Vec<(Split, String)>> {
    let needed = spec.total();
    if paths.is_empty() || needed > paths.len() {
        return Err(Error::InsufficientImages {
            needed: needed.max(1),
            available: paths.len(),
        });
    }
    let mut pool: Vec<String> = paths.to_vec();
    pool.sort();
    pool.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    pool.shuffle(&mut rng);
    let mut out = Vec::with_capacity(needed);
    let mut it = pool.into_iter();
    for (split, n) in [(Split::Train, spec.train), (Split::Val, spec.val), (Split::Test, spec.test)] {
        let mut chunk: Vec<String> = it.by_ref().take(n).collect();
        chunk.sort();
        out.extend(chunk.into_iter().map(|p| (split, p)));
    }
    Ok(out)
}

fn png_name(rel: &str) -> String {
    match rel.rfind('.') {
        Some(dot) if !rel[dot..].contains('/') => format!("{}.png", &rel[..dot]),
        _ => format!("{rel}.png"),
    }
}

fn write_png(img: &PlanarImage, root: &Path, rel: &str) -> Result<()> {
    let full = root.join(rel);
    if let Some(parent) = full.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    save_image(img, &full)
}

/// Build the paired benchmark under `out_dir` from the manifest's selected
/// images, reading sources relative to the manifest's corpus root.
pub fn build_benchmark(
    manifest: &CurationManifest,
    spec: &BenchmarkSpec,
    out_dir: impl AsRef<Path>,
) -> Result<BenchmarkIndex> {
    build_benchmark_from(Path::new(&manifest.corpus_root), &manifest.selected_paths(), spec, out_dir)
}

/// As [`build_benchmark`], with an explicit source root and image list.
pub fn build_benchmark_from(
    corpus_root: &Path,
    selected: &[String],
    spec: &BenchmarkSpec,
    out_dir: impl AsRef<Path>,
) -> Result<BenchmarkIndex> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let assigned = assign_splits(selected, spec)?;
    let names: BTreeSet<String> = assigned.iter().map(|(_, p)| png_name(p)).collect();
    if names.len() != assigned.len() {
        return Err(Error::Config("selected images collide after renaming to .png".into()));
    }

    let entries: Vec<IndexEntry> = assigned
        .par_iter()
        .map(|(split, rel)| {
            let src: PathBuf = corpus_root.join(rel);
            let img = load_image(&src)?;
            let name = png_name(rel);
            let split_dir = split.name();
            let gt = format!("{split_dir}/gt/{name}");
            write_png(&img, out_dir, &gt)?;
            let mut inputs = Vec::with_capacity(spec.specs.len());
            for d in &spec.specs {
                let tag = d.tag();
                let seed = derive_seed(spec.seed, rel, &tag);
                let degraded = d.apply(&img, seed)?;
                let path = format!("{split_dir}/input_{tag}/{name}");
                write_png(&degraded, out_dir, &path)?;
                inputs.push(DegradedPair {
                    tag,
                    spec: *d,
                    path,
                    seed,
                });
            }
            Ok(IndexEntry {
                split: *split,
                source: rel.clone(),
                gt,
                inputs,
            })
        })
        .collect::<Result<_>>()?;

    let index = BenchmarkIndex {
        version: INDEX_VERSION,
        seed: spec.seed,
        codec: CodecInfo::default(),
        splits: [spec.train, spec.val, spec.test],
        specs: spec.specs.clone(),
        entries,
    };
    let path = out_dir.join("index.json");
    std::fs::write(&path, index.to_json()?).map_err(|e| Error::io(&path, e))?;
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;

    fn gradient(w: usize, h: usize) -> PlanarImage {
        PlanarImage::from_fn(w, h, ColorSpace::Rgb, |c, x, y| {
            (x as f64 / w as f64 * 0.6 + y as f64 / h as f64 * 0.3 + c as f64 * 0.05).min(1.0)
        })
        .unwrap()
    }

    #[test]
    fn noise_is_seeded() {
        let img = PlanarImage::filled(32, 32, ColorSpace::Rgb, 0.5).unwrap();
        let a = add_gaussian_noise(&img, 25.0, 7).unwrap();
        assert_eq!(a, add_gaussian_noise(&img, 25.0, 7).unwrap());
        assert_ne!(a, add_gaussian_noise(&img, 25.0, 8).unwrap());
        assert_eq!(add_gaussian_noise(&img, 0.0, 1).unwrap(), img);
    }

    #[test]
    fn noise_psnr_falls_with_sigma() {
        let img = gradient(48, 40);
        let p: Vec<f64> = [15.0, 25.0, 50.0]
            .iter()
            .map(|&s| psnr(&add_gaussian_noise(&img, s, 3).unwrap(), &img).unwrap())
            .collect();
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn jpeg_cases() {
        let img = gradient(64, 48);
        let out = jpeg_roundtrip(&img, 100).unwrap();
        assert_eq!((out.width(), out.height()), (64, 48));
        assert!(psnr(&out, &img).unwrap() > 40.0);
        let flat = PlanarImage::filled(40, 24, ColorSpace::Rgb, 100.0 / 255.0).unwrap();
        assert!(psnr(&jpeg_roundtrip(&flat, 90).unwrap(), &flat).unwrap() > 50.0);
        // flat blocks keep only DC: error is at most half the scaled DC step
        // (DC = 8 * mean), plus a level for colour conversion rounding
        for q in [5u8, 10, 30] {
            let scale = if q < 50 { 5000 / q as u32 } else { 200 - 2 * q as u32 };
            let dc_step = ((16 * scale + 50) / 100).clamp(1, 255) as f64;
            let bound = 20.0 * (255.0 / (dc_step / 16.0 + 1.0)).log10();
            assert!(psnr(&jpeg_roundtrip(&flat, q).unwrap(), &flat).unwrap() >= bound);
        }
        let gray = PlanarImage::filled(16, 16, ColorSpace::Luma, 0.25).unwrap();
        assert_eq!(jpeg_roundtrip(&gray, 50).unwrap().channels(), 1);
        assert!(jpeg_roundtrip(&img, 0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(DegradationSpec::GaussianNoise { sigma: 0.0 }.validate().is_err());
        assert!(DegradationSpec::Jpeg { quality: 101 }.validate().is_err());
        assert_eq!(DegradationSpec::GaussianNoise { sigma: 25.0 }.tag(), "noise25");
        let s = BenchmarkSpec { train: 1, val: 0, test: 0, seed: 0, specs: vec![] };
        assert!(matches!(s.validate(), Err(Error::InsufficientSpecs)));
        let t = BenchmarkSpec::from_toml(
            "train = 8\nval = 1\ntest = 1\nseed = 5\n[[specs]]\nkind = \"jpeg\"\nquality = 10\n",
        )
        .unwrap();
        assert_eq!(t.specs, vec![DegradationSpec::Jpeg { quality: 10 }]);
    }

    #[test]
    fn scaled_splits() {
        let s = BenchmarkSpec::scaled(82_126, 0, vec![]);
        assert_eq!((s.train, s.val, s.test), REFERENCE_SPLITS);
        let s = BenchmarkSpec::scaled(10, 0, vec![]);
        assert_eq!((s.train, s.val, s.test), (8, 1, 1));
    }

    #[test]
    fn splits_disjoint_and_seeded() {
        let paths: Vec<String> = (0..20).map(|i| format!("img{i:02}.png")).collect();
        let spec = BenchmarkSpec { train: 12, val: 4, test: 3, seed: 9, specs: vec![] };
        let a = assign_splits(&paths, &spec).unwrap();
        assert_eq!(a, assign_splits(&paths, &spec).unwrap());
        let uniq: BTreeSet<&String> = a.iter().map(|(_, p)| p).collect();
        assert_eq!(uniq.len(), 19);
        let big = BenchmarkSpec { train: 30, ..spec };
        assert!(matches!(assign_splits(&paths, &big), Err(Error::InsufficientImages { .. })));
    }

    #[test]
    fn png_names() {
        assert_eq!(png_name("a/b.ppm"), "a/b.png");
        assert_eq!(png_name("x.y/z"), "x.y/z.png");
    }
}

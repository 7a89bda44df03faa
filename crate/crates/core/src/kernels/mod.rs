//! Deterministic forward kernels of the restoration network's building
//! blocks, evaluated offline: the adaptive average-pooling prior, SimpleGate,
//! bi-branch gated modulation, group-rational activations and the
//! frequency-windowed KAN.
//!
//! All "convolutions" here are 1x1, i.e. per-pixel [`LinearMap`]s.

mod aap;
mod check;
mod fwkan;
mod gate;
mod rational;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{ColorSpace, PlanarImage};

pub use aap::{aap, adaptive_avg_pool, default_prior_grid};
pub use check::{grad_error, kan_check, scaled_rel_err, KanCheckReport, GRAD_STEP, GRAD_TOLERANCE, KINK_GUARD, PIPELINE_TOLERANCE};
pub use fwkan::{
    fwkan_pipeline, fwkan_spectral, init_variance_preserving, second_moment, FwKanStack, KanLayer, MOMENT_SAMPLES,
};
pub use gate::{bbgm, gelu, simple_gate, BbgmWeights, GateBranch};
pub use rational::{rational_backward, rational_forward, GroupRational, RationalActivation, RationalGrad};

/// Channel-planar feature tensor with an arbitrary channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    planes: Vec<Vec<f64>>,
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        if width == 0 || height == 0 || planes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if planes.iter().any(|p| p.len() != width * height) {
            return Err(Error::ShapeMismatch(format!(
                "plane size differs from {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            planes,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let planes = (0..channels)
            .map(|c| (0..width * height).map(|i| f(c, i % width, i / width)).collect())
            .collect();
        Self::new(width, height, planes)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![vec![value; width * height]; channels])
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

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Vec<f64>> {
        self.planes
    }

    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels() == other.channels()
    }

    /// Channel vector at pixel `idx` (row-major).
    fn pixel(&self, idx: usize) -> Vec<f64> {
        self.planes.iter().map(|p| p[idx]).collect()
    }

    fn from_pixels(width: usize, height: usize, channels: usize, pixels: &[Vec<f64>]) -> Result<Self> {
        let planes = (0..channels)
            .map(|c| pixels.iter().map(|px| px[c]).collect())
            .collect();
        Self::new(width, height, planes)
    }

    /// Applies `map` to every pixel's channel vector.
    pub fn map_pixels(&self, map: &LinearMap) -> Result<FeatureMap> {
        if map.in_dim != self.channels() {
            return Err(Error::WeightShapeMismatch(format!(
                "map expects {} channels, feature has {}",
                map.in_dim,
                self.channels()
            )));
        }
        let n = self.width * self.height;
        let pixels: Vec<Vec<f64>> = (0..n).map(|i| map.apply(&self.pixel(i))).collect();
        Self::from_pixels(self.width, self.height, map.out_dim, &pixels)
    }
}

impl From<PlanarImage> for FeatureMap {
    fn from(img: PlanarImage) -> Self {
        let (w, h) = (img.width(), img.height());
        Self {
            width: w,
            height: h,
            planes: img.into_planes(),
        }
    }
}

impl TryFrom<FeatureMap> for PlanarImage {
    type Error = Error;

    fn try_from(f: FeatureMap) -> Result<Self> {
        let cs = if f.channels() == 3 {
            ColorSpace::Rgb
        } else {
            ColorSpace::Feature
        };
        PlanarImage::new(f.width, f.height, cs, f.planes)
    }
}

/// Affine map `y = W x + b` with `W` stored row-major as `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearMap {
    pub fn new(in_dim: usize, out_dim: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        let m = Self {
            in_dim,
            out_dim,
            weight,
            bias,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut weight = vec![0.0; dim * dim];
        for i in 0..dim {
            weight[i * dim + i] = 1.0;
        }
        Self {
            in_dim: dim,
            out_dim: dim,
            weight,
            bias: vec![0.0; dim],
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::WeightShapeMismatch("zero-sized linear map".into()));
        }
        if self.weight.len() != self.in_dim * self.out_dim || self.bias.len() != self.out_dim {
            return Err(Error::WeightShapeMismatch(format!(
                "{}x{} map with {} weights and {} biases",
                self.out_dim,
                self.in_dim,
                self.weight.len(),
                self.bias.len()
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        self.weight
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

use serde::{Deserialize, Serialize};

use super::{FeatureMap, LinearMap};
use crate::error::{Error, Result};

/// Exact GELU, `0.5 x (1 + erf(x / sqrt 2))`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2))
}

/// Splits the channels in half and returns `gelu(F1) * F2` (C/2 channels).
pub fn simple_gate(x: &FeatureMap) -> Result<FeatureMap> {
    let c = x.channels();
    if c % 2 != 0 {
        return Err(Error::OddChannelCount(c));
    }
    let (f1, f2) = x.planes().split_at(c / 2);
    let planes = f1
        .iter()
        .zip(f2)
        .map(|(a, b)| a.iter().zip(b).map(|(&a, &b)| gelu(a) * b).collect())
        .collect();
    FeatureMap::new(x.width(), x.height(), planes)
}

/// Which gate half modulates the second branch of the interaction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateBranch {
    /// Both branches use `W_a` (the published form; `W_b` is unused).
    #[default]
    Wa,
    /// Second branch uses `W_b`.
    Wb,
}

/// Per-pixel maps of the bi-branch gated modulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbgmWeights {
    /// `C -> D`, applied to the prior `G`.
    pub prior: LinearMap,
    /// `C -> D`, applied to the features `F`.
    pub feature: LinearMap,
    /// `D -> 2C`, produces the gates before GELU.
    pub fuse: LinearMap,
    /// `2C -> C` reduction of the concatenation; `None` averages the two halves.
    pub reduce: Option<LinearMap>,
    #[serde(default)]
    pub second_gate: GateBranch,
}

impl BbgmWeights {
    /// Identity maps throughout (`D = C`, fuse duplicates the product).
    pub fn identity(channels: usize) -> Self {
        let c = channels;
        let mut fuse = LinearMap::zeros(c, 2 * c);
        for i in 0..c {
            fuse.weight[i * c + i] = 1.0;
            fuse.weight[(c + i) * c + i] = 1.0;
        }
        Self {
            prior: LinearMap::identity(c),
            feature: LinearMap::identity(c),
            fuse,
            reduce: None,
            second_gate: GateBranch::Wa,
        }
    }

    fn check(&self, c: usize) -> Result<()> {
        for m in [&self.prior, &self.feature, &self.fuse] {
            m.validate()?;
        }
        let inner = self.prior.out_dim;
        let bad = self.prior.in_dim != c
            || self.feature.in_dim != c
            || self.feature.out_dim != inner
            || self.fuse.in_dim != inner
            || self.fuse.out_dim != 2 * c;
        if bad {
            return Err(Error::WeightShapeMismatch(format!(
                "maps incompatible with {c} channels"
            )));
        }
        if let Some(r) = &self.reduce {
            r.validate()?;
            if r.in_dim != 2 * c || r.out_dim != c {
                return Err(Error::WeightShapeMismatch(format!(
                    "reduce is {}->{}, expected {}->{c}",
                    r.in_dim,
                    r.out_dim,
                    2 * c
                )));
            }
        }
        Ok(())
    }
}

/// Fuses features `f` with the prior `g`:
/// gates `(W_a, W_b) = split(gelu(fuse(prior(g) * feature(f))))`, then
/// `reduce(concat[f + W_a * g, g + W_a * f])`.
pub fn bbgm(f: &FeatureMap, g: &FeatureMap, weights: &BbgmWeights) -> Result<FeatureMap> {
    if !f.same_shape(g) {
        return Err(Error::ShapeMismatch(format!(
            "f {}x{}x{} vs g {}x{}x{}",
            f.width(),
            f.height(),
            f.channels(),
            g.width(),
            g.height(),
            g.channels()
        )));
    }
    let c = f.channels();
    weights.check(c)?;
    let n = f.width() * f.height();
    let pixels: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let fp = f.pixel(i);
            let gp = g.pixel(i);
            let pg = weights.prior.apply(&gp);
            let pf = weights.feature.apply(&fp);
            let prod: Vec<f64> = pg.iter().zip(&pf).map(|(a, b)| a * b).collect();
            let gates: Vec<f64> = weights.fuse.apply(&prod).into_iter().map(gelu).collect();
            let (wa, wb) = gates.split_at(c);
            let second = match weights.second_gate {
                GateBranch::Wa => wa,
                GateBranch::Wb => wb,
            };
            let mut cat = Vec::with_capacity(2 * c);
            cat.extend((0..c).map(|k| fp[k] + wa[k] * gp[k]));
            cat.extend((0..c).map(|k| gp[k] + second[k] * fp[k]));
            match &weights.reduce {
                Some(r) => r.apply(&cat),
                None => (0..c).map(|k| 0.5 * (cat[k] + cat[c + k])).collect(),
            }
        })
        .collect();
    FeatureMap::from_pixels(f.width(), f.height(), c, &pixels)
}

//! Frequency-windowed KAN: DCT, zigzag reorder, window partition, a stack of
//! group-rational KAN layers applied to every window independently, then the
//! inverse of each step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureMap, GroupRational, LinearMap, RationalActivation};
use crate::error::{Error, Result};
use crate::spectral::{window_partition, window_reverse, Dct2dPlan, DctStrategy, ZigzagOrder};

/// Monte Carlo sample count for the second moment of an activation.
pub const MOMENT_SAMPLES: usize = 100_000;

/// One GR-KAN layer: `linear(phi(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanLayer {
    pub activation: GroupRational,
    pub linear: LinearMap,
}

impl KanLayer {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.linear.apply(&self.activation.apply(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwKanStack {
    pub window_len: usize,
    pub layers: Vec<KanLayer>,
    /// Seed used by [`init_variance_preserving`], if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FwKanStack {
    /// `depth` identity layers; the whole pipeline is then the identity map.
    pub fn identity(window_len: usize, depth: usize) -> Self {
        let layers = (0..depth)
            .map(|_| KanLayer {
                activation: GroupRational::uniform(RationalActivation::default_identity(), 1),
                linear: LinearMap::identity(window_len),
            })
            .collect();
        Self {
            window_len,
            layers,
            seed: None,
        }
    }

    /// Layers with the given hidden widths (`window_len -> widths.. -> window_len`),
    /// identity activations split into `groups`, and zero linear maps.
    pub fn zeros(window_len: usize, hidden: &[usize], groups: usize) -> Self {
        let mut dims = vec![window_len];
        dims.extend_from_slice(hidden);
        dims.push(window_len);
        let layers = dims
            .windows(2)
            .map(|d| KanLayer {
                activation: GroupRational::uniform(RationalActivation::default_identity(), groups),
                linear: LinearMap::zeros(d[0], d[1]),
            })
            .collect();
        Self {
            window_len,
            layers,
            seed: None,
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 {
            return Err(Error::IncompatibleStack("window_len must be >= 1".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::IncompatibleStack("stack has no layers".into()));
        }
        let mut width = self.window_len;
        for (i, layer) in self.layers.iter().enumerate() {
            layer
                .linear
                .validate()
                .map_err(|e| Error::IncompatibleStack(format!("layer {i}: {e}")))?;
            if layer.linear.in_dim != width {
                return Err(Error::IncompatibleStack(format!(
                    "layer {i} expects width {}, previous produces {width}",
                    layer.linear.in_dim
                )));
            }
            layer
                .activation
                .check_width(width)
                .map_err(|e| Error::IncompatibleStack(format!("layer {i}: {e}")))?;
            for act in &layer.activation.groups {
                if act.numerator.is_empty() {
                    return Err(Error::IncompatibleStack(format!("layer {i}: empty numerator")));
                }
            }
            width = layer.linear.out_dim;
        }
        if width != self.window_len {
            return Err(Error::IncompatibleStack(format!(
                "stack outputs width {width}, window_len is {}",
                self.window_len
            )));
        }
        Ok(())
    }

    pub fn forward_window(&self, window: &[f64]) -> Vec<f64> {
        self.layers
            .iter()
            .fold(window.to_vec(), |x, layer| layer.forward(&x))
    }

    /// Applies the stack to each window independently.
    pub fn forward_windows(&self, windows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        if let Some(w) = windows.iter().find(|w| w.len() != self.window_len) {
            return Err(Error::IncompatibleStack(format!(
                "window of length {}, stack expects {}",
                w.len(),
                self.window_len
            )));
        }
        Ok(windows.par_iter().map(|w| self.forward_window(w)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let stack: Self = serde_json::from_str(s)?;
        stack.validate()?;
        Ok(stack)
    }
}

/// Spectral half of the pipeline on one coefficient plane: zigzag, window,
/// stack, window reverse, inverse zigzag.
pub fn fwkan_spectral(coeffs: &[f64], order: &ZigzagOrder, stack: &FwKanStack) -> Result<Vec<f64>> {
    let seq = order.scan(coeffs)?;
    let (windows, part) = window_partition(&seq, stack.window_len)?;
    let out = stack.forward_windows(&windows)?;
    order.unscan(&window_reverse(&out, &part)?)
}

/// `idct(unzigzag(unwindow(stack(window(zigzag(dct(x)))))))`, per channel.
pub fn fwkan_pipeline(x: &FeatureMap, stack: &FwKanStack) -> Result<FeatureMap> {
    stack.validate()?;
    let plan = Dct2dPlan::new(x.height(), x.width(), DctStrategy::Auto);
    let order = ZigzagOrder::new(x.height(), x.width())?;
    let planes = x
        .planes()
        .iter()
        .map(|p| {
            let coeffs = plan.forward(p);
            let refined = fwkan_spectral(&coeffs, &order, stack)?;
            Ok(plan.inverse(&refined))
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMap::new(x.width(), x.height(), planes)
}

/// Monte Carlo estimate of `E[phi(z)^2]`, `z ~ N(0, 1)`.
pub fn second_moment(act: &RationalActivation, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sum: f64 = (0..samples)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = act.eval(z);
            y * y
        })
        .sum();
    sum / samples as f64
}

/// Redraws every linear map with i.i.d. `N(0, 1 / (fan_in * E[phi^2]))`
/// entries and zero bias, where `E[phi^2]` is the layer's mean activation
/// second moment under a unit Gaussian. Activations are kept.
pub fn init_variance_preserving(stack: &FwKanStack, seed: u64) -> Result<FwKanStack> {
    stack.validate()?;
    let mut out = stack.clone();
    out.seed = Some(seed);
    for (li, layer) in out.layers.iter_mut().enumerate() {
        let moment = layer
            .activation
            .groups
            .iter()
            .enumerate()
            .map(|(gi, act)| {
                let s = seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul((li * 1024 + gi + 1) as u64));
                second_moment(act, MOMENT_SAMPLES, s)
            })
            .sum::<f64>()
            / layer.activation.group_count() as f64;
        let fan_in = layer.linear.in_dim as f64;
        let std = 1.0 / (fan_in * moment.max(f64::MIN_POSITIVE)).sqrt();
        let normal = Normal::new(0.0, std)
            .map_err(|e| Error::IncompatibleStack(format!("layer {li}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(li as u64 + 1));
        for w in layer.linear.weight.iter_mut() {
            *w = normal.sample(&mut rng);
        }
        layer.linear.bias.iter_mut().for_each(|b| *b = 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature(w: usize, h: usize, c: usize) -> FeatureMap {
        FeatureMap::from_fn(w, h, c, |c, x, y| ((c * 31 + x * 7 + y * 13) % 23) as f64 / 23.0 - 0.4).unwrap()
    }

    #[test]
    fn identity_stack_is_identity() {
        let x = feature(40, 24, 3);
        let y = fwkan_pipeline(&x, &FwKanStack::identity(16, 3)).unwrap();
        for (a, b) in x.planes().iter().flatten().zip(y.planes().iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_maps_give_zero() {
        let x = feature(9, 7, 2);
        let y = fwkan_pipeline(&x, &FwKanStack::zeros(8, &[12], 4)).unwrap();
        assert!(y.planes().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn validation() {
        let mut s = FwKanStack::identity(8, 2);
        s.layers[1].linear = LinearMap::identity(4);
        assert!(matches!(s.validate(), Err(Error::IncompatibleStack(_))));
        let mut s = FwKanStack::identity(8, 1);
        s.layers[0].activation = GroupRational::uniform(RationalActivation::default_identity(), 3);
        assert!(s.validate().is_err());
        assert!(FwKanStack::identity(8, 0).validate().is_err());
        let x = feature(4, 4, 1);
        assert!(fwkan_pipeline(&x, &FwKanStack::zeros(0, &[], 1)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = init_variance_preserving(&FwKanStack::zeros(6, &[4], 2), 7).unwrap();
        let back = FwKanStack::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(FwKanStack::from_json("{\"window_len\": 3").is_err());
    }

    #[test]
    fn init_deterministic() {
        let base = FwKanStack::zeros(8, &[8], 2);
        let a = init_variance_preserving(&base, 42).unwrap();
        let b = init_variance_preserving(&base, 42).unwrap();
        let c = init_variance_preserving(&base, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn identity_activation_moment_is_one() {
        let m = second_moment(&RationalActivation::default_identity(), MOMENT_SAMPLES, 1);
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }
}

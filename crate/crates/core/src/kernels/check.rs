//! Runtime self-checks for a KAN stack: analytic rational gradients against
//! central differences, identity-stack reconstruction and window locality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fwkan_pipeline, FeatureMap, FwKanStack, RationalActivation};
use crate::error::Result;

pub const GRAD_STEP: f64 = 1e-5;
pub const GRAD_TOLERANCE: f64 = 1e-4;
pub const PIPELINE_TOLERANCE: f64 = 1e-4;
/// Points with `|S(x)|` below this, or where `S` changes sign inside the
/// difference stencil, are skipped.
pub const KINK_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanCheckReport {
    pub activations: usize,
    pub samples: usize,
    pub kink_skipped: usize,
    pub max_grad_rel_err: f64,
    pub identity_max_err: f64,
    pub locality_max_err: f64,
    pub passed: bool,
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn scaled_rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn near_kink(act: &RationalActivation, x: f64, h: f64) -> bool {
    if act.denominator.iter().all(|&b| b == 0.0) {
        return false;
    }
    let s = act.denominator_sum(x);
    let (lo, hi) = (act.denominator_sum(x - h), act.denominator_sum(x + h));
    s.abs() <= KINK_GUARD || lo.signum() != hi.signum() || lo.signum() != s.signum()
}

/// Largest scaled error over `dx`, every `da_i` and `db_j` at `x`, or `None`
/// when `x` is too close to the kink.
pub fn grad_error(act: &RationalActivation, x: f64, h: f64) -> Option<f64> {
    if near_kink(act, x, h) {
        return None;
    }
    let g = act.grad(x);
    let fd_x = (act.eval(x + h) - act.eval(x - h)) / (2.0 * h);
    let mut worst = scaled_rel_err(g.dx, fd_x);
    let perturbed = |num: bool, i: usize, d: f64| {
        let mut a = act.clone();
        if num {
            a.numerator[i] += d;
        } else {
            a.denominator[i] += d;
        }
        a.eval(x)
    };
    for (i, &da) in g.da.iter().enumerate() {
        let fd = (perturbed(true, i, h) - perturbed(true, i, -h)) / (2.0 * h);
        worst = worst.max(scaled_rel_err(da, fd));
    }
    for (j, &db) in g.db.iter().enumerate() {
        // moving b_j can itself cross the kink
        let fd = (perturbed(false, j, h) - perturbed(false, j, -h)) / (2.0 * h);
        let mut a = act.clone();
        a.denominator[j] += h;
        let up = a.denominator_sum(x);
        a.denominator[j] -= 2.0 * h;
        let down = a.denominator_sum(x);
        if up.signum() == down.signum() {
            worst = worst.max(scaled_rel_err(db, fd));
        }
    }
    Some(worst)
}

/// Like `f64::max`, but NaN wins.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> Result<FeatureMap> {
    let planes = (0..c)
        .map(|_| (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    FeatureMap::new(w, h, planes)
}

/// Gradient checks on `trials` points in `[-5, 5]` per activation, the
/// identity-stack round trip and window locality of `stack`.
pub fn kan_check(stack: &FwKanStack, trials: usize, seed: u64) -> Result<KanCheckReport> {
    stack.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = KanCheckReport {
        activations: 0,
        samples: 0,
        kink_skipped: 0,
        max_grad_rel_err: 0.0,
        identity_max_err: 0.0,
        locality_max_err: 0.0,
        passed: false,
    };
    for layer in &stack.layers {
        for act in &layer.activation.groups {
            report.activations += 1;
            for _ in 0..trials {
                let x = rng.random_range(-5.0..5.0);
                match grad_error(act, x, GRAD_STEP) {
                    Some(e) => {
                        let e = if e.is_nan() { f64::INFINITY } else { e };
                        report.samples += 1;
                        report.max_grad_rel_err = report.max_grad_rel_err.max(e);
                    }
                    None => report.kink_skipped += 1,
                }
            }
        }
    }

    let identity = FwKanStack::identity(stack.window_len, stack.depth().max(1));
    let x = random_map(&mut rng, 16, 12, 2)?;
    let y = fwkan_pipeline(&x, &identity)?;
    report.identity_max_err = x
        .planes()
        .iter()
        .flatten()
        .zip(y.planes().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, nan_max);

    let n = stack.window_len;
    let mut windows: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let before = stack.forward_windows(&windows)?;
    for v in &mut windows[1] {
        *v += rng.random_range(-1.0..1.0);
    }
    let after = stack.forward_windows(&windows)?;
    report.locality_max_err = [0usize, 2]
        .iter()
        .flat_map(|&w| before[w].iter().zip(&after[w]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, nan_max);

    report.passed = report.max_grad_rel_err < GRAD_TOLERANCE
        && report.identity_max_err < PIPELINE_TOLERANCE
        && report.locality_max_err == 0.0;
    Ok(report)
}

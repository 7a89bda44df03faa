//! Orthonormal 1-D DCT-II / DCT-III kernels and the separable 2-D driver.
//!
//! Lengths up to [`NAIVE_MAX_LEN`] use a precomputed cosine matrix; longer
//! axes fold the sequence into a same-length complex FFT (even samples forward,
//! odd samples reversed) and rotate each bin by `exp(-i pi k / 2N)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Axes at or below this length use the direct matrix product.
pub const NAIVE_MAX_LEN: usize = 32;

/// Which 1-D kernel to use per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DctStrategy {
    /// Matrix path for short axes, FFT path otherwise.
    #[default]
    Auto,
    Naive,
    Fast,
}

#[inline]
fn ortho_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Precomputed state for one axis length.
pub(crate) enum Dct1d {
    Naive {
        n: usize,
        /// `basis[k * n + i] = s(k) cos(pi (2i + 1) k / 2n)`
        basis: Vec<f64>,
    },
    Fast {
        n: usize,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        /// `exp(-i pi k / 2n)`
        twiddle: Vec<Complex<f64>>,
        scale: Vec<f64>,
    },
}

impl Dct1d {
    pub(crate) fn new(n: usize, strategy: DctStrategy) -> Self {
        let fast = match strategy {
            DctStrategy::Auto => n > NAIVE_MAX_LEN,
            DctStrategy::Naive => false,
            DctStrategy::Fast => true,
        };
        if fast {
            let mut planner = FftPlanner::new();
            Dct1d::Fast {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                twiddle: (0..n)
                    .map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
                    .collect(),
                scale: (0..n).map(|k| ortho_scale(k, n)).collect(),
            }
        } else {
            let mut basis = vec![0.0; n * n];
            for k in 0..n {
                let s = ortho_scale(k, n);
                for i in 0..n {
                    basis[k * n + i] =
                        s * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
                }
            }
            Dct1d::Naive { n, basis }
        }
    }

    fn len(&self) -> usize {
        match self {
            Dct1d::Naive { n, .. } | Dct1d::Fast { n, .. } => *n,
        }
    }

    /// Scratch buffer size needed by [`forward`](Self::forward)/[`inverse`](Self::inverse).
    fn scratch_len(&self) -> usize {
        match self {
            Dct1d::Naive { n, .. } => *n,
            Dct1d::Fast {
                n,
                forward,
                inverse,
                ..
            } => {
                n + forward
                    .get_inplace_scratch_len()
                    .max(inverse.get_inplace_scratch_len())
            }
        }
    }

    /// In-place forward DCT-II of `line`.
    fn forward(&self, line: &mut [f64], scratch: &mut Vec<Complex<f64>>, tmp: &mut Vec<f64>) {
        match self {
            Dct1d::Naive { n, basis } => {
                tmp.clear();
                tmp.extend_from_slice(line);
                for (k, out) in line.iter_mut().enumerate() {
                    let row = &basis[k * n..(k + 1) * n];
                    *out = row.iter().zip(tmp.iter()).map(|(b, x)| b * x).sum();
                }
            }
            Dct1d::Fast {
                n,
                forward,
                twiddle,
                scale,
                ..
            } => {
                let n = *n;
                scratch.resize(self.scratch_len(), Complex::default());
                let (buf, fft_scratch) = scratch.split_at_mut(n);
                let half = n.div_ceil(2);
                for i in 0..half {
                    buf[i] = Complex::new(line[2 * i], 0.0);
                }
                for i in 0..n / 2 {
                    buf[n - 1 - i] = Complex::new(line[2 * i + 1], 0.0);
                }
                forward.process_with_scratch(buf, fft_scratch);
                for k in 0..n {
                    line[k] = scale[k] * (buf[k] * twiddle[k]).re;
                }
            }
        }
    }

    /// In-place inverse (orthonormal DCT-III) of `line`.
    fn inverse(&self, line: &mut [f64], scratch: &mut Vec<Complex<f64>>, tmp: &mut Vec<f64>) {
        match self {
            Dct1d::Naive { n, basis } => {
                let n = *n;
                tmp.clear();
                tmp.extend_from_slice(line);
                for (i, out) in line.iter_mut().enumerate() {
                    *out = (0..n).map(|k| basis[k * n + i] * tmp[k]).sum();
                }
            }
            Dct1d::Fast {
                n,
                inverse,
                twiddle,
                scale,
                ..
            } => {
                let n = *n;
                scratch.resize(self.scratch_len(), Complex::default());
                let (buf, fft_scratch) = scratch.split_at_mut(n);
                // Undo the orthonormal weights, then rebuild the FFT bins:
                // V[k] = exp(i pi k / 2n) (c[k] - i c[n-k]), c[n] = 0.
                let c = |k: usize| line[k] / scale[k];
                buf[0] = Complex::new(c(0), 0.0);
                for k in 1..n {
                    buf[k] = twiddle[k].conj() * Complex::new(c(k), -c(n - k));
                }
                inverse.process_with_scratch(buf, fft_scratch);
                let norm = 1.0 / n as f64;
                let half = n.div_ceil(2);
                for i in 0..half {
                    line[2 * i] = buf[i].re * norm;
                }
                for i in 0..n / 2 {
                    line[2 * i + 1] = buf[n - 1 - i].re * norm;
                }
            }
        }
    }
}

/// Separable 2-D orthonormal DCT for a fixed `height x width` plane shape.
pub struct Dct2dPlan {
    width: usize,
    height: usize,
    rows: Dct1d,
    cols: Dct1d,
}

impl Dct2dPlan {
    pub fn new(height: usize, width: usize, strategy: DctStrategy) -> Self {
        Self {
            width,
            height,
            rows: Dct1d::new(width, strategy),
            cols: Dct1d::new(height, strategy),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Forward DCT-II of a row-major plane.
    pub fn forward(&self, plane: &[f64]) -> Vec<f64> {
        self.run(plane, true)
    }

    /// Inverse transform of a row-major coefficient plane.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        self.run(coeffs, false)
    }

    fn run(&self, input: &[f64], forward: bool) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        assert_eq!(input.len(), w * h, "plane size does not match plan");
        let apply = |kernel: &Dct1d, data: &mut [f64]| {
            let len = kernel.len();
            data.par_chunks_mut(len).for_each_init(
                || (Vec::new(), Vec::new()),
                |(scratch, tmp), line| {
                    if forward {
                        kernel.forward(line, scratch, tmp)
                    } else {
                        kernel.inverse(line, scratch, tmp)
                    }
                },
            );
        };
        let mut data = input.to_vec();
        apply(&self.rows, &mut data);
        let mut t = transpose(&data, w, h);
        apply(&self.cols, &mut t);
        transpose(&t, h, w)
    }
}

/// Transposes a row-major `h x w` matrix into a row-major `w x h` one.
fn transpose(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    const BLOCK: usize = 32;
    let mut dst = vec![0.0; w * h];
    for by in (0..h).step_by(BLOCK) {
        for bx in (0..w).step_by(BLOCK) {
            for y in by..(by + BLOCK).min(h) {
                for x in bx..(bx + BLOCK).min(w) {
                    dst[x * h + y] = src[y * w + x];
                }
            }
        }
    }
    dst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_1d(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                ortho_scale(k, n)
                    * x.iter()
                        .enumerate()
                        .map(|(i, v)| v * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos())
                        .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn fast_matches_definition_all_small_lengths() {
        for n in 1..=40 {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.3).collect();
            let want = naive_1d(&x);
            for strategy in [DctStrategy::Fast, DctStrategy::Naive] {
                let k = Dct1d::new(n, strategy);
                let mut line = x.clone();
                let (mut s, mut t) = (Vec::new(), Vec::new());
                k.forward(&mut line, &mut s, &mut t);
                for (a, b) in line.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-12, "n={n} {strategy:?}");
                }
                k.inverse(&mut line, &mut s, &mut t);
                for (a, b) in line.iter().zip(&x) {
                    assert!((a - b).abs() < 1e-12, "n={n} {strategy:?} inverse");
                }
            }
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let src: Vec<f64> = (0..35).map(|v| v as f64).collect();
        let t = transpose(&src, 7, 5);
        assert_eq!(t[7 * 0 + 0], 0.0);
        assert_eq!(t[1 * 5 + 0], 1.0);
        assert_eq!(transpose(&t, 5, 7), src);
    }
}

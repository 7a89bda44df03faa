//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the transform code under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectradec::{ColorSpace, PlanarImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn alpha(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal 2-D DCT-II straight from the definition, O(N^4).
pub fn naive_dct2(plane: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    for u in 0..h {
        for v in 0..w {
            let mut s = 0.0;
            for y in 0..h {
                let cy = ((2 * y + 1) as f64 * u as f64 * PI / (2 * h) as f64).cos();
                for x in 0..w {
                    let cx = ((2 * x + 1) as f64 * v as f64 * PI / (2 * w) as f64).cos();
                    s += plane[y * w + x] * cy * cx;
                }
            }
            out[u * w + v] = alpha(u, h) * alpha(v, w) * s;
        }
    }
    out
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, cs: ColorSpace) -> PlanarImage {
    let c = if cs == ColorSpace::Luma { 1 } else { 3 };
    let planes = (0..c).map(|_| (0..w * h).map(|_| rng.random::<f64>()).collect()).collect();
    PlanarImage::new(w, h, cs, planes).unwrap()
}

/// Photograph-like content: smooth 1/f-ish field built from random
/// low-frequency cosines, a few hard edges and mild grain, channels
/// correlated. Values in [0, 1].
pub fn natural_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> PlanarImage {
    let waves: Vec<(f64, f64, f64, f64)> = (0..24)
        .map(|i| {
            let f = 1.0 + i as f64 * 0.7;
            let theta = rng.random_range(0.0..PI);
            let amp = rng.random_range(0.5..1.0) / f;
            let phase = rng.random_range(0.0..2.0 * PI);
            (f * theta.cos(), f * theta.sin(), amp, phase)
        })
        .collect();
    let edges: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.15..0.15),
            )
        })
        .collect();
    let tint: Vec<f64> = (0..3).map(|_| rng.random_range(-0.08..0.08)).collect();
    let mut base = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
            let mut s: f64 = waves
                .iter()
                .map(|&(fx, fy, a, p)| a * (2.0 * PI * (fx * u + fy * v) + p).cos())
                .sum();
            for &(nx, ny, off, step) in &edges {
                if nx * (u - 0.5) + ny * (v - 0.5) > off {
                    s += step * 4.0;
                }
            }
            base[y * w + x] = s;
        }
    }
    let (lo, hi) = base.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let planes = (0..3)
        .map(|c| {
            base.iter()
                .map(|&v| {
                    let n = 0.1 + 0.8 * (v - lo) / (hi - lo);
                    (n + tint[c] + rng.random_range(-0.01..0.01)).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    PlanarImage::new(w, h, ColorSpace::Rgb, planes).unwrap()
}

/// Symmetric normalised co-occurrence matrix by enumerating every pixel
/// pair `(p, p + (dy, dx))`.
pub fn brute_glcm(q: &[usize], w: usize, h: usize, levels: usize, dy: isize, dx: isize) -> Vec<f64> {
    let mut counts = vec![0u64; levels * levels];
    let mut pairs = 0u64;
    for y0 in 0..h {
        for x0 in 0..w {
            for y1 in 0..h {
                for x1 in 0..w {
                    if y1 as isize - y0 as isize == dy && x1 as isize - x0 as isize == dx {
                        let (a, b) = (q[y0 * w + x0], q[y1 * w + x1]);
                        counts[a * levels + b] += 1;
                        counts[b * levels + a] += 1;
                        pairs += 2;
                    }
                }
            }
        }
    }
    counts.iter().map(|&c| c as f64 / pairs as f64).collect()
}

/// Mean SSIM over all valid 11x11 windows, each window's Gaussian-weighted
/// moments computed directly.
pub fn direct_ssim(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
    let (win, sigma) = (11usize, 1.5f64);
    let r = (win / 2) as f64;
    let mut g = vec![0.0; win * win];
    for i in 0..win {
        for j in 0..win {
            let (dy, dx) = (i as f64 - r, j as f64 - r);
            g[i * win + j] = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
        }
    }
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= total);
    let (c1, c2) = ((0.01f64).powi(2), (0.03f64).powi(2));
    let mut acc = 0.0;
    let mut count = 0usize;
    for y in 0..=h - win {
        for x in 0..=w - win {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    let k = (y + i) * w + x + j;
                    ma += g[i * win + j] * a[k];
                    mb += g[i * win + j] * b[k];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    let k = (y + i) * w + x + j;
                    let wt = g[i * win + j];
                    va += wt * (a[k] - ma) * (a[k] - ma);
                    vb += wt * (b[k] - mb) * (b[k] - mb);
                    cov += wt * (a[k] - ma) * (b[k] - mb);
                }
            }
            acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Max absolute difference over all samples.
pub fn max_abs_diff(a: &PlanarImage, b: &PlanarImage) -> f64 {
    a.planes()
        .iter()
        .flatten()
        .zip(b.planes().iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

use super::FeatureMap;
use crate::error::{Error, Result};

/// `(max(1, H/16), max(1, W/16))`, the prior grid of the zero-frequency stage.
pub fn default_prior_grid(height: usize, width: usize) -> (usize, usize) {
    ((height / 16).max(1), (width / 16).max(1))
}

/// Adaptive average pooling to an output grid of `rows x cols`. Bucket `r`
/// covers input rows `floor(r H / rows) .. ceil((r + 1) H / rows)`.
pub fn adaptive_avg_pool(x: &FeatureMap, grid: (usize, usize)) -> Result<FeatureMap> {
    let (rows, cols) = grid;
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput);
    }
    let (h, w) = (x.height(), x.width());
    let bounds = |i: usize, n: usize, out: usize| ((i * n) / out, ((i + 1) * n).div_ceil(out));
    let planes = x
        .planes()
        .iter()
        .map(|p| {
            let mut out = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                let (y0, y1) = bounds(r, h, rows);
                for c in 0..cols {
                    let (x0, x1) = bounds(c, w, cols);
                    let mut sum = 0.0;
                    for y in y0..y1 {
                        sum += p[y * w + x0..y * w + x1].iter().sum::<f64>();
                    }
                    out.push(sum / ((y1 - y0) * (x1 - x0)) as f64);
                }
            }
            out
        })
        .collect();
    FeatureMap::new(cols, rows, planes)
}

/// Global prior `g * local + g`, where `g` is the per-channel global mean
/// and `local` the adaptive pool to `grid`.
pub fn aap(x: &FeatureMap, grid: (usize, usize)) -> Result<FeatureMap> {
    let global = adaptive_avg_pool(x, (1, 1))?;
    let local = adaptive_avg_pool(x, grid)?;
    let planes = local
        .planes()
        .iter()
        .zip(global.planes())
        .map(|(l, g)| l.iter().map(|v| g[0] * v + g[0]).collect())
        .collect();
    FeatureMap::new(local.width(), local.height(), planes)
}

//! Adaptive-pooling prior, SimpleGate and bi-branch gated modulation on a
//! random feature map.
//!
//! cargo run --example gates

use spectradec::kernels::{aap, adaptive_avg_pool, bbgm, default_prior_grid, gelu, simple_gate, BbgmWeights, FeatureMap};

fn main() -> spectradec::Result<()> {
    let f = FeatureMap::from_fn(64, 48, 8, |c, x, y| ((x * 31 + y * 17 + c * 5) % 29) as f64 / 29.0 - 0.5)?;

    let grid = default_prior_grid(f.height(), f.width());
    let g = aap(&f, grid)?;
    println!("prior grid {grid:?}, prior has {} channels", g.channels());

    let gated = simple_gate(&f)?;
    println!("SimpleGate: {} -> {} channels", f.channels(), gated.channels());

    // both branches meet at the prior's resolution
    let f_low = adaptive_avg_pool(&f, grid)?;
    let fused = bbgm(&f_low, &g, &BbgmWeights::identity(f.channels()))?;
    println!("BBGM output {}x{}x{}", fused.width(), fused.height(), fused.channels());

    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!("gelu({x:+.1}) = {:+.5}", gelu(x));
    }
    Ok(())
}

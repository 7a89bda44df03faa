//! Frequency-windowed KAN: build a stack, initialise it, run it over the
//! zigzag spectrum of a feature map and self-check the gradients.
//!
//! cargo run --example fwkan

use spectradec::kernels::{
    fwkan_pipeline, init_variance_preserving, kan_check, FeatureMap, FwKanStack,
};

fn main() -> spectradec::Result<()> {
    let x = FeatureMap::from_fn(32, 24, 4, |c, px, py| ((px * 7 + py * 3 + c) % 13) as f64 / 13.0 - 0.5)?;

    let identity = FwKanStack::identity(16, 2);
    let y = fwkan_pipeline(&x, &identity)?;
    let err = x
        .planes()
        .iter()
        .flatten()
        .zip(y.planes().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("identity stack max error {err:.2e}");

    let stack = init_variance_preserving(&FwKanStack::zeros(16, &[32], 4), 42)?;
    let y = fwkan_pipeline(&x, &stack)?;
    let energy = |m: &FeatureMap| m.planes().iter().flatten().map(|v| v * v).sum::<f64>();
    println!("random stack energy ratio {:.3}", energy(&y) / energy(&x));

    let report = kan_check(&stack, 200, 7)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("stack JSON is {} bytes", stack.to_json()?.len());
    Ok(())
}

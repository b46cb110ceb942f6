//! Affine pushforward of a Gaussian measure.
//!
//! The law of `Z = A X + s` under `X ~ N(c, Q)` is `N(A c + s, A Q A^T)`.
//! This example checks the closed form against the empirical moments of
//! mapped samples and demonstrates that composing two maps commutes with
//! composing their pushforwards.
//!
//! ```bash
//! cargo run --example pushforward
//! ```

use gaussrisk::gaussian::{AffineMap, GaussianMeasure};
use gaussrisk::montecarlo::pushforward_moment_check;
use nalgebra::{DMatrix, DVector};

fn main() -> gaussrisk::Result<()> {
    println!("=== Affine pushforward of a Gaussian ===\n");

    let measure = GaussianMeasure::new(
        DVector::from_row_slice(&[1.0, -0.5, 0.25]),
        DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.0, 0.1, 0.0, 0.5]),
    )?;
    let map = AffineMap::new(
        DMatrix::from_row_slice(2, 3, &[1.0, 0.5, -0.25, 0.0, 2.0, 1.0]),
        DVector::from_row_slice(&[3.0, -1.0]),
    )?;

    let pushed = measure.pushforward(&map)?;
    println!("analytic mean of A X + s: {:?}", pushed.mean().as_slice());
    println!("analytic covariance:\n{}", pushed.covariance());

    println!("1. Moments of 100,000 mapped samples vs the analytic law:");
    let deviation = pushforward_moment_check(&measure, &map, 100_000, 7)?;
    println!("   worst mean deviation:       {:.3} standard errors", deviation.max_mean_dev);
    println!("   worst covariance deviation: {:.3} standard errors", deviation.max_cov_dev);
    println!("   both within the 4-sigma band: {}\n", deviation.max_mean_dev <= 4.0 && deviation.max_cov_dev <= 4.0);

    println!("2. Composition: push through (A1, s1) then (A2, s2)");
    let first = AffineMap::new(
        DMatrix::from_row_slice(2, 3, &[0.5, 1.0, 0.0, -1.0, 0.0, 2.0]),
        DVector::from_row_slice(&[0.1, 0.2]),
    )?;
    let second = AffineMap::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]),
        DVector::from_row_slice(&[-1.0, 4.0]),
    )?;
    let chained = measure.pushforward(&first)?.pushforward(&second)?;
    let composed = measure.pushforward(&first.then(&second)?)?;
    let mean_gap = (chained.mean() - composed.mean()).norm();
    let cov_gap = (chained.covariance() - composed.covariance()).norm();
    println!("   |mean difference|       = {mean_gap:.3e}");
    println!("   |covariance difference| = {cov_gap:.3e}");
    println!("   single map equals the chain: {}", mean_gap < 1e-10 && cov_gap < 1e-10);

    Ok(())
}

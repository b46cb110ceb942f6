//! Characteristic function of a Gaussian measure.
//!
//! The Fourier transform of `N(c, Q)` is `exp(i<h, c> - 1/2 <Q h, h>)`;
//! since it uniquely characterizes the measure, matching the empirical
//! transform `(1/K) sum exp(i<h, x_j>)` at many frequencies is a strong
//! distributional test of the sampler.
//!
//! ```bash
//! cargo run --example characteristic_function
//! ```

use gaussrisk::gaussian::GaussianMeasure;
use gaussrisk::montecarlo::empirical_cf_from_batch;
use gaussrisk::rng::DrawRng;
use nalgebra::{DMatrix, DVector};

fn main() -> gaussrisk::Result<()> {
    println!("=== Characteristic function vs empirical transform ===\n");

    let measure = GaussianMeasure::new(
        DVector::from_row_slice(&[0.5, -0.25, 1.0, 0.0]),
        DMatrix::from_row_slice(
            4,
            4,
            &[
                1.5, 0.2, 0.0, 0.1, //
                0.2, 1.0, 0.3, 0.0, //
                0.0, 0.3, 0.8, 0.0, //
                0.1, 0.0, 0.0, 0.6,
            ],
        ),
    )?;

    let count = 100_000;
    let bound = 5.0 / (count as f64).sqrt();
    let batch = measure.sample(count, 3)?;
    let mut rng = DrawRng::new(99, 0);

    println!("frequency |h|    analytic (re, im)      empirical (re, im)     |gap|    <= {bound:.4}");
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let raw = DVector::from_fn(4, |_, _| rng.standard_normal());
        let h = &raw * (2.0 / raw.norm() * 0.9);
        let analytic = measure.characteristic_function(&h)?;
        let empirical = empirical_cf_from_batch(&batch, &h)?;
        let gap = (empirical - analytic).norm();
        worst = worst.max(gap);
        println!(
            "   {:.3}      ({:+.4}, {:+.4})      ({:+.4}, {:+.4})      {:.2e}   {}",
            h.norm(),
            analytic.re,
            analytic.im,
            empirical.re,
            empirical.im,
            gap,
            if gap <= bound { "ok" } else { "MISS" }
        );
    }
    println!("\nworst gap over 20 frequencies: {worst:.3e} (bound {bound:.3e})");
    println!("phi(0) = {}", measure.characteristic_function(&DVector::zeros(4))?);

    Ok(())
}

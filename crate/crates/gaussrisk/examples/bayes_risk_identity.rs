//! Bayes risk equals the trace of the posterior covariance.
//!
//! Three independent routes to the same number:
//!   1. the closed form `tr(post_cov)`,
//!   2. the trace identity
//!      `tr(post_cov prior_cov^{-1} post_cov) + tr(post_cov H_misfit post_cov)`,
//!      with its first term also evaluated through the pushforward +
//!      second-moment chain,
//!   3. a nested Monte Carlo estimate: draw the truth from the prior, then
//!      data given the truth, and average the posterior mean's squared error.
//!
//! Also demonstrates that the posterior mean coincides with the relabeled
//! regularized estimator (the MAP point in the linear-Gaussian case).
//!
//! ```bash
//! cargo run --release --example bayes_risk_identity
//! ```

use gaussrisk::estimator::EstimatorOperators;
use gaussrisk::montecarlo::bayes_risk_mc;
use gaussrisk::posterior::posterior_from_instance;
use gaussrisk::problem::make_random_instance;

fn main() -> gaussrisk::Result<()> {
    println!("=== Bayes risk = tr(posterior covariance) ===\n");

    let instance = make_random_instance(4, 6, 2024)?;
    let post = posterior_from_instance(&instance)?;

    println!("posterior covariance condition estimate: {:.3e}\n", post.condition_estimate());

    println!("1. Closed form");
    let trace = post.bayes_risk_analytic();
    println!("   tr(post_cov) = {trace:.10}\n");

    println!("2. Trace identity (both terms via symmetric factored solves)");
    let identity = post.trace_identity_report();
    println!("   prior-bias term    tr(G Gpr^-1 G)  = {:.10}", identity.bias_term);
    println!("   data-variance term tr(G Hm G)      = {:.10}", identity.variance_term);
    println!("   sum                                = {:.10}", identity.bias_term + identity.variance_term);
    println!("   residual against tr(G)             = {:.3e}\n", identity.residual);

    println!("   prior-bias term through the pushforward + second-moment route:");
    let via_pushforward = post.prior_expected_bias_sq()?;
    println!("   {via_pushforward:.10} (difference {:.3e})\n", (via_pushforward - identity.bias_term).abs());

    println!("3. Nested Monte Carlo (100,000 prior draws, one data draw each)");
    let mc = bayes_risk_mc(&post, 100_000, 5)?;
    println!("   estimate = {:.6} +/- {:.6}", mc.value, mc.std_error);
    println!(
        "   |estimate - trace| = {:.6} <= 4 se = {:.6}: {}\n",
        (mc.value - trace).abs(),
        4.0 * mc.std_error,
        (mc.value - trace).abs() <= 4.0 * mc.std_error
    );

    println!("4. Posterior mean = relabeled regularized estimate (MAP)");
    let y = instance.simulate_data(instance.truth().unwrap(), 9)?;
    let ops = EstimatorOperators::build(&instance)?;
    let gap = (post.mean(&y)? - ops.estimate(&instance, &y)?).norm();
    println!("   |posterior mean - estimate| = {gap:.3e}");

    Ok(())
}

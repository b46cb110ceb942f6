//! Seeded Monte Carlo estimates for every analytic quantity in the crate.
//!
//! Each estimator reports a value with a standard error (sample standard
//! deviation of the summands over sqrt(count)) so callers can apply
//! four-standard-error acceptance bands. Determinism contract: identical
//! `(inputs, count, seed)` reproduce results bit for bit; independent batches
//! inside one estimator use disjoint sub-seeds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::{standard_error, EstimatorOperators};
use crate::gaussian::{empirical_moments, AffineMap, GaussianMeasure, SampleBatch};
use crate::posterior::Posterior;
use crate::problem::ProblemInstance;
use crate::rng::sub_seed;

const TAG_BAYES_PRIOR: u64 = 0x21;
const TAG_BAYES_NOISE: u64 = 0x22;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub count: usize,
    pub seed: u64,
}

fn summarize(values: &[f64], seed: u64) -> McEstimate {
    McEstimate {
        value: values.iter().sum::<f64>() / values.len() as f64,
        std_error: standard_error(values),
        count: values.len(),
        seed,
    }
}

fn require_count(count: usize) -> Result<()> {
    if count < 2 {
        return Err(Error::InsufficientSamples {
            count,
            required: 2,
        });
    }
    Ok(())
}

/// Estimate the frequentist risk `E_y ||m - m_hat(y)||^2` at truth `m` by
/// simulating `count` data realizations.
pub fn frequentist_risk_mc(
    ops: &EstimatorOperators,
    instance: &ProblemInstance,
    m: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<McEstimate> {
    require_count(count)?;
    let losses = simulated_losses(ops, instance, m, count, seed)?;
    Ok(summarize(&losses, seed))
}

fn simulated_losses(
    ops: &EstimatorOperators,
    instance: &ProblemInstance,
    m: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let signal = instance.model().forward() * m;
    let noise = instance.model().noise_law().sample(count, seed)?;
    noise
        .draws()
        .iter()
        .map(|eta| {
            let m_hat = ops.estimate(instance, &(&signal + eta))?;
            Ok((m - m_hat).norm_squared())
        })
        .collect()
}

/// Simulate a batch of data realizations `y_j = F m + eta_j` for reuse in
/// decomposition checks.
pub fn simulate_data_batch(
    instance: &ProblemInstance,
    m: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    let signal = instance.model().forward() * m;
    let noise = instance.model().noise_law().sample(count, seed)?;
    Ok(noise.draws().iter().map(|eta| &signal + eta).collect())
}

/// Estimate the Bayes risk by the double integral: draw `m_j` from the prior,
/// then one data realization per outer draw, and average
/// `||m_j - posterior_mean(y_j)||^2`. One inner draw per outer draw is an
/// unbiased estimator of the nested integral.
pub fn bayes_risk_mc(post: &Posterior, count: usize, seed: u64) -> Result<McEstimate> {
    require_count(count)?;
    let params = post.prior().sample(count, sub_seed(seed, TAG_BAYES_PRIOR))?;
    let noise = post
        .model()
        .noise_law()
        .sample(count, sub_seed(seed, TAG_BAYES_NOISE))?;
    let forward = post.model().forward();
    let losses: Vec<f64> = params
        .draws()
        .iter()
        .zip(noise.draws())
        .map(|(m, eta)| {
            let y = forward * m + eta;
            let m_post = post.mean(&y)?;
            Ok((m - m_post).norm_squared())
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&losses, seed))
}

/// Sample mean of the estimator over simulated data, with componentwise
/// standard errors. Feeds the empirical bias check.
pub fn estimator_mean_mc(
    ops: &EstimatorOperators,
    instance: &ProblemInstance,
    m: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    require_count(count)?;
    let ys = simulate_data_batch(instance, m, count, seed)?;
    let estimates: Vec<DVector<f64>> = ys
        .iter()
        .map(|y| ops.estimate(instance, y))
        .collect::<Result<_>>()?;
    let batch = SampleBatch::from_draws(estimates, seed)?;
    let (mean, cov) = empirical_moments(&batch)?;
    let std_errors = DVector::from_fn(mean.len(), |i, _| (cov[(i, i)] / count as f64).sqrt());
    Ok((mean, std_errors))
}

/// Monte Carlo estimate of `E ||x||^2` under a measure.
pub fn second_moment_mc(measure: &GaussianMeasure, count: usize, seed: u64) -> Result<McEstimate> {
    require_count(count)?;
    let batch = measure.sample(count, seed)?;
    let values: Vec<f64> = batch.draws().iter().map(|x| x.norm_squared()).collect();
    Ok(summarize(&values, seed))
}

/// Empirical characteristic function `(1/K) sum exp(i <h, x_j>)`.
pub fn empirical_cf(
    measure: &GaussianMeasure,
    h: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Result<Complex64> {
    require_count(count)?;
    let batch = measure.sample(count, seed)?;
    empirical_cf_from_batch(&batch, h)
}

/// Same estimate over an existing batch, so several frequencies can share
/// one set of draws.
pub fn empirical_cf_from_batch(batch: &SampleBatch, h: &DVector<f64>) -> Result<Complex64> {
    if h.len() != batch.dim() {
        return Err(Error::dim("frequency vector length", batch.dim(), h.len()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for x in batch.draws() {
        let phase = h.dot(x);
        acc += Complex64::new(phase.cos(), phase.sin());
    }
    Ok(acc / batch.count() as f64)
}

/// How far empirical moments of mapped draws sit from the analytic
/// pushforward, in standard-error units (worst component).
#[derive(Debug, Clone, Copy)]
pub struct MomentDeviation {
    pub max_mean_dev: f64,
    pub max_cov_dev: f64,
    pub count: usize,
    pub seed: u64,
}

/// Sample the base measure, map every draw through `map`, and compare the
/// empirical moments against the analytic pushforward law.
pub fn pushforward_moment_check(
    measure: &GaussianMeasure,
    map: &AffineMap,
    count: usize,
    seed: u64,
) -> Result<MomentDeviation> {
    require_count(count)?;
    let pushed = measure.pushforward(map)?;
    let base = measure.sample(count, seed)?;
    let mapped: Vec<DVector<f64>> = base
        .draws()
        .iter()
        .map(|x| map.apply(x))
        .collect::<Result<_>>()?;
    let batch = SampleBatch::from_draws(mapped, seed)?;
    deviation_from(&batch, pushed.mean(), pushed.covariance())
}

/// Deviation of a batch's empirical moments from reference moments, in
/// standard-error units.
pub fn deviation_from(
    batch: &SampleBatch,
    ref_mean: &DVector<f64>,
    ref_cov: &DMatrix<f64>,
) -> Result<MomentDeviation> {
    let (mean, cov) = empirical_moments(batch)?;
    let n = mean.len();
    if ref_mean.len() != n {
        return Err(Error::dim("reference mean length", n, ref_mean.len()));
    }
    let k = batch.count() as f64;

    let mut max_mean_dev: f64 = 0.0;
    for i in 0..n {
        let se = (cov[(i, i)] / k).sqrt();
        max_mean_dev = max_mean_dev.max(in_se_units(mean[i] - ref_mean[i], se));
    }

    // Standard error of a covariance entry from the spread of the products
    // of centered coordinates.
    let mut max_cov_dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let products: Vec<f64> = batch
                .draws()
                .iter()
                .map(|x| (x[i] - mean[i]) * (x[j] - mean[j]))
                .collect();
            let se = standard_error(&products);
            max_cov_dev = max_cov_dev.max(in_se_units(cov[(i, j)] - ref_cov[(i, j)], se));
        }
    }

    Ok(MomentDeviation {
        max_mean_dev,
        max_cov_dev,
        count: batch.count(),
        seed: batch.seed(),
    })
}

fn in_se_units(diff: f64, se: f64) -> f64 {
    if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff.abs() / se
    }
}

//! Property and invariant suite: algebraic identities under random inputs,
//! the sampling contracts, and the statistical behavior of the Monte Carlo
//! oracles under fixed seeds.

mod common;

use common::{moment_stats, random_measure, random_vector, rel_err, rel_err_mat};
use gaussrisk::estimator::EstimatorOperators;
use gaussrisk::gaussian::{empirical_moments, AffineMap, GaussianMeasure, SampleBatch};
use gaussrisk::montecarlo::{bayes_risk_mc, frequentist_risk_mc};
use gaussrisk::oed::{exhaustive_select, greedy_select, trace_after_design, CandidatePool};
use gaussrisk::posterior::{posterior_from_instance, prior_from_regularization, Posterior};
use gaussrisk::problem::{
    make_random_instance, LinearForwardModel, ProblemInstance, RegularizationSpec,
};
use gaussrisk::rng::DrawRng;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn unit_scalar_instance() -> ProblemInstance {
    let model = LinearForwardModel::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
    )
    .unwrap();
    let reg = RegularizationSpec::new(1.0, DMatrix::identity(1, 1), DVector::zeros(1)).unwrap();
    ProblemInstance::new(model, reg, Some(DVector::from_element(1, 1.0))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Pushing through two maps equals pushing through their composition.
    /// Map shapes never expand the dimension, so the intermediate law is a
    /// nondegenerate Gaussian and both routes are well posed.
    #[test]
    fn pushforward_composition(seed in 0u64..10_000, n in 1usize..5, f1 in 0usize..4, f2 in 0usize..4) {
        let m1 = 1 + f1 % n;
        let m2 = 1 + f2 % m1;
        let measure = random_measure(n, seed);
        let mut rng = DrawRng::new(seed ^ 0x51, 0);
        let first = AffineMap::new(
            DMatrix::from_fn(m1, n, |_, _| rng.standard_normal()),
            DVector::from_fn(m1, |_, _| rng.standard_normal()),
        ).unwrap();
        let second = AffineMap::new(
            DMatrix::from_fn(m2, m1, |_, _| rng.standard_normal()),
            DVector::from_fn(m2, |_, _| rng.standard_normal()),
        ).unwrap();

        let chained = measure.pushforward(&first).unwrap().pushforward(&second).unwrap();
        let composed = measure.pushforward(&first.then(&second).unwrap()).unwrap();
        prop_assert!((chained.mean() - composed.mean()).norm() <= 1e-10 * composed.mean().norm().max(1.0));
        prop_assert!(rel_err_mat(chained.covariance(), composed.covariance()) <= 1e-10);
    }

    /// The characteristic function at -h is the conjugate of the value at h.
    #[test]
    fn characteristic_function_conjugate_symmetry(seed in 0u64..10_000, n in 1usize..6) {
        let measure = random_measure(n, seed);
        let mut rng = DrawRng::new(seed ^ 0x52, 0);
        let h = DVector::from_fn(n, |_, _| 2.0 * rng.standard_normal());
        let plus = measure.characteristic_function(&h).unwrap();
        let minus = measure.characteristic_function(&(-&h)).unwrap();
        prop_assert!((minus - plus.conj()).norm() <= 1e-15);
        prop_assert!(plus.norm() <= 1.0 + 1e-12);
    }

    /// Identical (measure, count, seed) triples reproduce draws bit for bit.
    #[test]
    fn sampling_determinism(seed in 0u64..10_000, n in 1usize..5, count in 1usize..40) {
        let measure = random_measure(n, seed);
        let a = measure.sample(count, seed ^ 0x53).unwrap();
        let b = measure.sample(count, seed ^ 0x53).unwrap();
        for (x, y) in a.draws().iter().zip(b.draws()) {
            prop_assert_eq!(x.as_slice(), y.as_slice());
        }
    }

    /// Bias is linear in (m - m0): doubling the offset doubles the bias.
    #[test]
    fn bias_scales_linearly(seed in 0u64..5_000, n in 1usize..6, d in 1usize..6) {
        let instance = make_random_instance(n, d, seed).unwrap();
        let ops = EstimatorOperators::build(&instance).unwrap();
        let m0 = instance.regularization().reference().clone();
        let v = random_vector(n, seed ^ 0x54);
        let single = ops.bias(&instance, &(&m0 + &v)).unwrap();
        let double = ops.bias(&instance, &(&m0 + &v * 2.0)).unwrap();
        prop_assert!((&double - &single * 2.0).norm() <= 1e-10 * single.norm().max(1e-30));
    }

    /// Two routes to the second moment of a pushed measure agree:
    /// the measure-level formula vs direct trace algebra.
    #[test]
    fn second_moment_two_routes(seed in 0u64..5_000, n in 1usize..5) {
        let measure = random_measure(n, seed);
        let mut rng = DrawRng::new(seed ^ 0x55, 0);
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + 0.3 * rng.standard_normal() } else { 0.3 * rng.standard_normal() });
        let map = AffineMap::new(a.clone(), DVector::zeros(n)).unwrap();
        let Ok(pushed) = measure.pushforward(&map) else { return Ok(()); };
        let direct = (&a * measure.covariance() * a.transpose()).trace()
            + (&a * measure.mean()).norm_squared();
        prop_assert!(rel_err(pushed.second_moment(), direct) <= 1e-10);
    }

    /// The selection criterion depends on the subset, not its order.
    #[test]
    fn design_criterion_order_invariant(seed in 0u64..5_000) {
        let mut rng = DrawRng::new(seed, 0);
        let rows = (0..5).map(|_| {
            (DVector::from_fn(3, |_, _| rng.standard_normal()), 0.3 + rng.standard_normal().abs())
        }).collect();
        let pool = CandidatePool::new(rows, None).unwrap();
        let prior = GaussianMeasure::standard(3);
        let forward = trace_after_design(&pool, &prior, &[0, 2, 4]).unwrap();
        let backward = trace_after_design(&pool, &prior, &[4, 2, 0]).unwrap();
        let shuffled = trace_after_design(&pool, &prior, &[2, 4, 0]).unwrap();
        prop_assert!((forward - backward).abs() <= 1e-12 * forward);
        prop_assert!((forward - shuffled).abs() <= 1e-12 * forward);
    }
}

/// Mapped samples and samples of the pushed measure agree in distribution:
/// empirical moments of both routes match the analytic law within 4 se.
#[test]
fn pushforward_and_sampling_commute() {
    let measure = random_measure(3, 301);
    let mut rng = DrawRng::new(302, 0);
    let map = AffineMap::new(
        DMatrix::from_fn(2, 3, |_, _| rng.standard_normal()),
        DVector::from_fn(2, |_, _| rng.standard_normal()),
    )
    .unwrap();
    let pushed = measure.pushforward(&map).unwrap();

    let mapped: Vec<DVector<f64>> = measure
        .sample(100_000, 303)
        .unwrap()
        .draws()
        .iter()
        .map(|x| map.apply(x).unwrap())
        .collect();
    let direct = pushed.sample(100_000, 304).unwrap();

    for (label, draws) in [("mapped", &mapped), ("direct", &direct.draws().to_vec())] {
        let stats = moment_stats(draws);
        for i in 0..2 {
            assert!(
                (stats.mean[i] - pushed.mean()[i]).abs() <= 4.0 * stats.mean_se[i],
                "{label} mean[{i}]"
            );
            for j in 0..2 {
                assert!(
                    (stats.cov[(i, j)] - pushed.covariance()[(i, j)]).abs()
                        <= 4.0 * stats.cov_se[(i, j)],
                    "{label} cov[{i},{j}]"
                );
            }
        }
    }
}

/// Simulated data minus the noise-free signal recovers the noise law:
/// empirical moments of `y_j - F m` match N(0, noise_cov) within 4 se.
#[test]
fn simulated_residuals_match_noise_law() {
    let instance = make_random_instance(3, 4, 1234).unwrap();
    let truth = instance.truth().unwrap().clone();
    let signal = instance.model().forward() * &truth;
    let residuals: Vec<DVector<f64>> =
        gaussrisk::montecarlo::simulate_data_batch(&instance, &truth, 100_000, 1235)
            .unwrap()
            .into_iter()
            .map(|y| y - &signal)
            .collect();
    let stats = moment_stats(&residuals);
    let noise_cov = instance.model().noise_cov();
    for i in 0..4 {
        assert!(stats.mean[i].abs() <= 4.0 * stats.mean_se[i], "mean[{i}]");
        for j in 0..4 {
            assert!(
                (stats.cov[(i, j)] - noise_cov[(i, j)]).abs() <= 4.0 * stats.cov_se[(i, j)],
                "cov[{i},{j}]"
            );
        }
    }
}

/// Bit-level determinism of the nested Bayes-risk estimator.
#[test]
fn bayes_risk_mc_is_bit_deterministic() {
    let instance = make_random_instance(3, 4, 77).unwrap();
    let post = posterior_from_instance(&instance).unwrap();
    let a = bayes_risk_mc(&post, 2_000, 42).unwrap();
    let b = bayes_risk_mc(&post, 2_000, 42).unwrap();
    assert_eq!(a, b);
}

/// Exhaustive ties resolve to the lexicographically smallest subset.
#[test]
fn exhaustive_tie_break_is_lexicographic() {
    let row = DVector::from_row_slice(&[1.0, -0.5]);
    let rows = vec![(row, 1.0); 4];
    let pool = CandidatePool::new(rows, None).unwrap();
    let prior = GaussianMeasure::standard(2);
    let selection = exhaustive_select(&pool, &prior, 2).unwrap();
    assert_eq!(selection.chosen, vec![0, 1]);
}

/// Normal-equation residual bound on 100 random instances with n, d <= 50.
#[test]
fn normal_equation_residual_bound() {
    for seed in 0..100u64 {
        let n = 1 + (seed as usize * 17) % 50;
        let d = 1 + (seed as usize * 23) % 50;
        let instance = make_random_instance(n, d, 90_000 + seed).unwrap();
        let ops = EstimatorOperators::build(&instance).unwrap();
        let y = instance
            .simulate_data(instance.truth().unwrap(), 91_000 + seed)
            .unwrap();
        let m_hat = ops.estimate(&instance, &y).unwrap();

        let model = instance.model();
        let reg = instance.regularization();
        let rhs = model.forward().transpose() * model.noise_law().solve_covariance_vec(&y).unwrap()
            + reg.reg() * reg.reference() * reg.beta();
        let residual = (ops.hessian() * &m_hat - &rhs).norm();
        assert!(
            residual <= 1e-10 * rhs.norm(),
            "instance {seed} (n={n}, d={d}): residual {residual:.3e} vs rhs {:.3e}",
            rhs.norm()
        );
    }
}

/// At beta = 1e8 the penalty dominates and the estimate collapses to m0.
#[test]
fn huge_beta_pins_estimate_to_reference() {
    let instance = make_random_instance(4, 5, 555).unwrap();
    let y = instance
        .simulate_data(instance.truth().unwrap(), 556)
        .unwrap();
    let m0 = instance.regularization().reference().clone();

    let weak = EstimatorOperators::build(&instance).unwrap();
    let weak_offset = (weak.estimate(&instance, &y).unwrap() - &m0).norm();

    let stiff_instance = instance.with_beta(1e8).unwrap();
    let stiff = EstimatorOperators::build(&stiff_instance).unwrap();
    let stiff_offset = (stiff.estimate(&stiff_instance, &y).unwrap() - &m0).norm();

    assert!(
        stiff_offset <= 1e-5 * weak_offset,
        "stiff {stiff_offset:.3e} vs weak {weak_offset:.3e}"
    );
}

/// The factored-solve variance trace matches the explicit-inverse formula
/// tr(H^{-2} H_misfit) computed on small instances.
#[test]
fn variance_trace_matches_explicit_inverse() {
    for seed in 0..20u64 {
        let n = 1 + (seed as usize) % 20;
        let d = 1 + (seed as usize * 7) % 20;
        let instance = make_random_instance(n, d, 70_000 + seed).unwrap();
        let ops = EstimatorOperators::build(&instance).unwrap();
        let truth = instance.truth().unwrap().clone();
        let mse = ops.mse_analytic(&instance, &truth).unwrap();

        let h_inv = ops.hessian().clone().try_inverse().unwrap();
        let explicit = (&h_inv * &h_inv * ops.misfit_hessian()).trace();
        assert!(
            rel_err(mse.variance_trace, explicit) <= 1e-9,
            "instance {seed}: {} vs {explicit}",
            mse.variance_trace
        );
    }
}

/// Rescaling the noise by alpha with beta -> beta/alpha leaves the estimator
/// map and the bias invariant while the variance term scales exactly by
/// alpha; trading beta against R leaves the entire MSE invariant.
#[test]
fn rescaling_invariances() {
    let instance = make_random_instance(4, 6, 808).unwrap();
    let truth = instance.truth().unwrap().clone();
    let y = instance.simulate_data(&truth, 809).unwrap();
    let base_ops = EstimatorOperators::build(&instance).unwrap();
    let base_estimate = base_ops.estimate(&instance, &y).unwrap();
    let base_mse = base_ops.mse_analytic(&instance, &truth).unwrap();

    for alpha in [0.5, 2.0, 10.0] {
        // (noise_cov, beta) -> (alpha noise_cov, beta / alpha): same objective
        // minimizer, same bias; the data law carries alpha times the noise.
        let model = LinearForwardModel::new(
            instance.model().forward().clone(),
            instance.model().noise_cov() * alpha,
        )
        .unwrap();
        let reg = RegularizationSpec::new(
            instance.regularization().beta() / alpha,
            instance.regularization().reg().clone(),
            instance.regularization().reference().clone(),
        )
        .unwrap();
        let scaled = ProblemInstance::new(model, reg, Some(truth.clone())).unwrap();
        let ops = EstimatorOperators::build(&scaled).unwrap();

        let estimate = ops.estimate(&scaled, &y).unwrap();
        assert!(
            (&estimate - &base_estimate).norm() <= 1e-9 * base_estimate.norm(),
            "alpha {alpha}: estimator map changed"
        );
        let mse = ops.mse_analytic(&scaled, &truth).unwrap();
        assert!(
            rel_err(mse.bias_sq, base_mse.bias_sq) <= 1e-9,
            "alpha {alpha}: bias changed"
        );
        assert!(
            rel_err(mse.variance_trace, alpha * base_mse.variance_trace) <= 1e-9,
            "alpha {alpha}: variance must scale by alpha, got {} vs {}",
            mse.variance_trace,
            alpha * base_mse.variance_trace
        );

        // (beta, R) -> (beta / gamma, gamma R) leaves beta R unchanged, so
        // every MSE component is invariant.
        let gamma = alpha;
        let reg = RegularizationSpec::new(
            instance.regularization().beta() / gamma,
            instance.regularization().reg() * gamma,
            instance.regularization().reference().clone(),
        )
        .unwrap();
        let traded =
            ProblemInstance::new(instance.model().clone(), reg, Some(truth.clone())).unwrap();
        let traded_ops = EstimatorOperators::build(&traded).unwrap();
        let traded_mse = traded_ops.mse_analytic(&traded, &truth).unwrap();
        assert!(rel_err(traded_mse.total, base_mse.total) <= 1e-9);
        assert!(rel_err(traded_mse.bias_sq, base_mse.bias_sq) <= 1e-9);
        assert!(rel_err(traded_mse.variance_trace, base_mse.variance_trace) <= 1e-9);
    }
}

/// Appending an observation row never increases tr(post_cov).
#[test]
fn information_monotonicity_random_instances() {
    for seed in 0..15u64 {
        let n = 2 + (seed as usize) % 6;
        let d = 1 + (seed as usize * 3) % 6;
        let instance = make_random_instance(n, d, 60_000 + seed).unwrap();
        let prior = prior_from_regularization(instance.regularization()).unwrap();
        let base = Posterior::from_prior(instance.model().clone(), prior.clone()).unwrap();

        let row = random_vector(n, 61_000 + seed);
        let mut forward = DMatrix::zeros(d + 1, n);
        forward
            .view_mut((0, 0), (d, n))
            .copy_from(instance.model().forward());
        forward.view_mut((d, 0), (1, n)).copy_from(&row.transpose());
        let mut noise = DMatrix::identity(d + 1, d + 1) * 0.7;
        noise
            .view_mut((0, 0), (d, d))
            .copy_from(instance.model().noise_cov());
        let extended = LinearForwardModel::new(forward, noise).unwrap();
        let more = Posterior::from_prior(extended, prior).unwrap();

        assert!(
            more.bayes_risk_analytic()
                <= base.bayes_risk_analytic() + 1e-12 * base.bayes_risk_analytic(),
            "seed {seed}: trace grew"
        );
    }
}

/// Monte Carlo error decays at the 1/sqrt(count) rate: RMS error at 1e5
/// draws is at most 0.2 of the RMS error at 1e3 draws (20 replicates each).
#[test]
fn bayes_risk_mc_convergence_rate() {
    let model = LinearForwardModel::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
    )
    .unwrap();
    let post = Posterior::from_prior(model, GaussianMeasure::standard(1)).unwrap();

    let rms = |count: usize| -> f64 {
        let mut acc = 0.0;
        for replicate in 0..20u64 {
            let est = bayes_risk_mc(&post, count, 1000 + replicate).unwrap();
            acc += (est.value - 0.5) * (est.value - 0.5);
        }
        (acc / 20.0).sqrt()
    };

    let coarse = rms(1_000);
    let mid = rms(10_000);
    let fine = rms(100_000);
    assert!(
        fine <= 0.2 * coarse,
        "RMS did not contract: 1e3 -> {coarse:.3e}, 1e4 -> {mid:.3e}, 1e5 -> {fine:.3e}"
    );
    assert!(mid < coarse, "mid-count RMS should already improve");
}

/// Across 50 seeds the frequentist risk estimator is unbiased: the grand
/// mean sits within 4 pooled standard errors of the closed form.
#[test]
fn frequentist_risk_mc_unbiasedness() {
    let instance = make_random_instance(3, 4, 909).unwrap();
    let truth = instance.truth().unwrap().clone();
    let ops = EstimatorOperators::build(&instance).unwrap();
    let analytic = ops.mse_analytic(&instance, &truth).unwrap().total;

    let count = 4_000;
    let mut values = Vec::new();
    let mut se_sq_sum = 0.0;
    for seed in 0..50u64 {
        let est = frequentist_risk_mc(&ops, &instance, &truth, count, 2000 + seed).unwrap();
        values.push(est.value);
        se_sq_sum += est.std_error * est.std_error;
    }
    let grand_mean = values.iter().sum::<f64>() / values.len() as f64;
    let pooled_se = se_sq_sum.sqrt() / values.len() as f64;
    assert!(
        (grand_mean - analytic).abs() <= 4.0 * pooled_se,
        "grand mean {grand_mean} vs analytic {analytic} (pooled se {pooled_se})"
    );
}

/// Exhaustive search never loses to greedy, across random pools and budgets.
#[test]
fn exhaustive_never_worse_than_greedy_sweep() {
    for seed in 0..8u64 {
        let mut rng = DrawRng::new(7_000 + seed, 0);
        let rows = (0..6)
            .map(|_| {
                (
                    DVector::from_fn(3, |_, _| rng.standard_normal()),
                    0.2 + rng.standard_normal().abs(),
                )
            })
            .collect();
        let pool = CandidatePool::new(rows, None).unwrap();
        let prior = GaussianMeasure::standard(3);
        for k in 1..=3 {
            let greedy = greedy_select(&pool, &prior, k).unwrap();
            let best = exhaustive_select(&pool, &prior, k).unwrap();
            assert!(
                best.objective() <= greedy.objective() + 1e-12,
                "seed {seed} k {k}"
            );
        }
    }
}

/// Posterior trace identity residual stays at rounding level across the
/// posterior module's contractual condition range.
#[test]
fn trace_identity_residual_sweep() {
    for seed in 0..40u64 {
        let n = 1 + (seed as usize * 11) % 50;
        let d = 1 + (seed as usize * 5) % 50;
        let instance = make_random_instance(n, d, 30_000 + seed).unwrap();
        let post = posterior_from_instance(&instance).unwrap();
        if post.condition_estimate() > 1e6 {
            continue;
        }
        let report = post.trace_identity_report();
        assert!(report.residual <= 1e-10 * report.rhs, "seed {seed}");
    }
}

/// Batches constructed directly obey the count invariant and feed the
/// moment estimator exactly like sampled batches.
#[test]
fn hand_built_batches_match_sampled_statistics() {
    let measure = random_measure(2, 404);
    let sampled = measure.sample(5_000, 405).unwrap();
    let rebuilt = SampleBatch::from_draws(sampled.draws().to_vec(), sampled.seed()).unwrap();
    assert_eq!(rebuilt.count(), 5_000);
    let (m1, c1) = empirical_moments(&sampled).unwrap();
    let (m2, c2) = empirical_moments(&rebuilt).unwrap();
    assert_eq!(m1.as_slice(), m2.as_slice());
    assert_eq!(c1.as_slice(), c2.as_slice());
}

/// The scalar unit problem pins every closed form at once; this is the
/// smallest fully-worked instance and the anchor for the study reports.
#[test]
fn scalar_unit_problem_closed_forms() {
    let instance = unit_scalar_instance();
    let truth = DVector::from_element(1, 1.0);
    let ops = EstimatorOperators::build(&instance).unwrap();
    let mse = ops.mse_analytic(&instance, &truth).unwrap();
    assert!(rel_err(mse.bias_sq, 0.25) <= 1e-14);
    assert!(rel_err(mse.variance_trace, 0.25) <= 1e-14);
    assert!(rel_err(mse.total, 0.5) <= 1e-14);

    let post = posterior_from_instance(&instance).unwrap();
    assert!(rel_err(post.bayes_risk_analytic(), 0.5) <= 1e-14);
    let identity = post.trace_identity_report();
    assert!(rel_err(identity.bias_term, 0.25) <= 1e-14);
    assert!(rel_err(identity.variance_term, 0.25) <= 1e-14);
}

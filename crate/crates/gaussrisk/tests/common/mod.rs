// Helpers are shared across suites; each suite uses a different subset.
#![allow(dead_code)]

//! Shared helpers for the integration suites. Oracles here stay independent
//! of the library code paths they check: explicit inverses, entrywise sums,
//! and hand-rolled moment statistics only.

use gaussrisk::gaussian::GaussianMeasure;
use gaussrisk::rng::DrawRng;
use nalgebra::{DMatrix, DVector};

/// Random SPD matrix with bounded condition number (test-side construction).
pub fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = DrawRng::new(seed, 0);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.standard_normal());
    g.transpose() * &g / dim as f64 + DMatrix::identity(dim, dim) * 0.1
}

pub fn random_vector(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = DrawRng::new(seed, 1);
    DVector::from_fn(dim, |_, _| rng.standard_normal())
}

pub fn random_measure(dim: usize, seed: u64) -> GaussianMeasure {
    GaussianMeasure::new(random_vector(dim, seed), random_spd(dim, seed ^ 0xABCD))
        .expect("random SPD construction is positive definite")
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

pub fn rel_err_mat(value: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    (value - reference).norm() / reference.norm()
}

/// Sample mean/covariance of draws together with standard errors: mean
/// errors from the diagonal, covariance-entry errors from the spread of the
/// centered products.
pub struct MomentStats {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub mean_se: DVector<f64>,
    pub cov_se: DMatrix<f64>,
}

pub fn moment_stats(draws: &[DVector<f64>]) -> MomentStats {
    let k = draws.len();
    assert!(k >= 2, "need at least two draws");
    let n = draws[0].len();

    let mut mean = DVector::zeros(n);
    for d in draws {
        mean += d;
    }
    mean /= k as f64;

    let mut cov = DMatrix::zeros(n, n);
    for d in draws {
        let c = d - &mean;
        cov += &c * c.transpose();
    }
    cov /= (k - 1) as f64;

    let mean_se = DVector::from_fn(n, |i, _| (cov[(i, i)] / k as f64).sqrt());

    let mut cov_se = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let products: Vec<f64> = draws
                .iter()
                .map(|d| (d[i] - mean[i]) * (d[j] - mean[j]))
                .collect();
            let pm = products.iter().sum::<f64>() / k as f64;
            let var = products.iter().map(|p| (p - pm) * (p - pm)).sum::<f64>() / (k - 1) as f64;
            cov_se[(i, j)] = (var / k as f64).sqrt();
        }
    }

    MomentStats {
        mean,
        cov,
        mean_se,
        cov_se,
    }
}

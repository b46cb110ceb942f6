//! The regularized least-squares estimator and its exact risk algebra.
//!
//! For the objective
//! `1/2 (F m - y)^T noise_cov^{-1} (F m - y) + beta/2 (m - m0)^T R (m - m0)`
//! the minimizer is `m_hat(y) = H^{-1} (F^T noise_cov^{-1} y + beta R m0)`
//! with `H = H_misfit + beta R` and `H_misfit = F^T noise_cov^{-1} F`.
//! The estimator is Gaussian in `y`, which gives closed forms for its bias,
//! `-beta H^{-1} R (m - m0)`, and its mean-squared error,
//! `beta^2 ||H^{-1} R (m - m0)||^2 + tr(H^{-1} H_misfit H^{-1})`.
//!
//! All inverse applications go through cached Cholesky factors; explicit
//! inverses appear only in small test oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{spd_factorize, CholFactor};
use crate::problem::ProblemInstance;

/// Hessian pair of the regularized objective, with a cached factorization.
#[derive(Debug, Clone)]
pub struct EstimatorOperators {
    hessian: DMatrix<f64>,
    misfit_hessian: DMatrix<f64>,
    hessian_chol: CholFactor,
}

/// Additive split of the mean-squared error: `total = bias_sq + variance_trace`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseBreakdown {
    pub total: f64,
    pub bias_sq: f64,
    pub variance_trace: f64,
}

/// Empirical two-sided view of the MSE decomposition, reported not asserted.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionReport {
    /// Mean of `||m - m_hat(y_j)||^2` over the batch.
    pub empirical_mse: f64,
    pub empirical_mse_se: f64,
    /// `||m - mean(m_hat)||^2 + (1/K) sum ||m_hat_j - mean(m_hat)||^2`.
    pub decomposed: f64,
    pub bias_part: f64,
    pub variance_part: f64,
    pub variance_part_se: f64,
    pub difference: f64,
    pub count: usize,
}

impl EstimatorOperators {
    /// Assemble `H_misfit` and `H` from an instance.
    pub fn build(instance: &ProblemInstance) -> Result<Self> {
        let misfit_hessian = instance.model().misfit_hessian();
        let reg = instance.regularization();
        let raw = &misfit_hessian + reg.reg() * reg.beta();
        let (hessian, hessian_chol) = spd_factorize(&raw, "estimator Hessian")?;
        Ok(EstimatorOperators {
            hessian,
            misfit_hessian,
            hessian_chol,
        })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn misfit_hessian(&self) -> &DMatrix<f64> {
        &self.misfit_hessian
    }

    pub fn dim(&self) -> usize {
        self.hessian.nrows()
    }

    /// Solve `H x = rhs` through the cached factor.
    pub fn solve_hessian(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.hessian_chol.solve(rhs)
    }

    pub fn solve_hessian_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.hessian_chol.solve(rhs)
    }

    /// Right-hand side of the normal equations for data `y`.
    fn normal_rhs(&self, instance: &ProblemInstance, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != instance.data_dim() {
            return Err(Error::dim("data vector length", instance.data_dim(), y.len()));
        }
        let model = instance.model();
        let reg = instance.regularization();
        let weighted = model.noise_law().solve_covariance_vec(y)?;
        Ok(model.forward().transpose() * weighted + reg.reg() * reg.reference() * reg.beta())
    }

    /// The unique minimizer `m_hat(y) = H^{-1}(F^T noise_cov^{-1} y + beta R m0)`.
    pub fn estimate(&self, instance: &ProblemInstance, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.solve_hessian_vec(&self.normal_rhs(instance, y)?))
    }

    /// Exact estimator bias at truth `m`: `-beta H^{-1} R (m - m0)`.
    pub fn bias(&self, instance: &ProblemInstance, m: &DVector<f64>) -> Result<DVector<f64>> {
        if m.len() != instance.param_dim() {
            return Err(Error::dim("truth vector length", instance.param_dim(), m.len()));
        }
        let reg = instance.regularization();
        let shifted = reg.reg() * (m - reg.reference());
        Ok(self.solve_hessian_vec(&shifted) * (-reg.beta()))
    }

    /// Closed-form MSE at truth `m`.
    ///
    /// The variance term is evaluated in the symmetric form
    /// `tr(H^{-1} H_misfit H^{-1})` via two factored solves, which is equal to
    /// `tr(H^{-2} H_misfit)` by trace cyclicity and stays nonnegative under
    /// rounding.
    pub fn mse_analytic(&self, instance: &ProblemInstance, m: &DVector<f64>) -> Result<MseBreakdown> {
        let bias = self.bias(instance, m)?;
        let bias_sq = bias.norm_squared();
        let x = self.solve_hessian(&self.misfit_hessian);
        let variance_trace = self.solve_hessian(&x.transpose()).trace();
        Ok(MseBreakdown {
            total: bias_sq + variance_trace,
            bias_sq,
            variance_trace,
        })
    }

    /// Empirical check of the bias/variance decomposition over a data batch.
    ///
    /// Both sides use the sample mean of the estimates and a `1/K` variance
    /// normalization, so a single-draw batch is well defined (variance part 0).
    pub fn mse_decomposition_check(
        &self,
        instance: &ProblemInstance,
        m: &DVector<f64>,
        data_batch: &[DVector<f64>],
    ) -> Result<DecompositionReport> {
        if data_batch.is_empty() {
            return Err(Error::param("data_batch", "must be non-empty"));
        }
        let k = data_batch.len();
        let estimates: Vec<DVector<f64>> = data_batch
            .iter()
            .map(|y| self.estimate(instance, y))
            .collect::<Result<_>>()?;

        let mut mean_estimate = DVector::zeros(self.dim());
        for est in &estimates {
            mean_estimate += est;
        }
        mean_estimate /= k as f64;

        let losses: Vec<f64> = estimates.iter().map(|est| (m - est).norm_squared()).collect();
        let spreads: Vec<f64> = estimates
            .iter()
            .map(|est| (est - &mean_estimate).norm_squared())
            .collect();

        let empirical_mse = losses.iter().sum::<f64>() / k as f64;
        let bias_part = (m - &mean_estimate).norm_squared();
        let variance_part = spreads.iter().sum::<f64>() / k as f64;
        let decomposed = bias_part + variance_part;

        Ok(DecompositionReport {
            empirical_mse,
            empirical_mse_se: standard_error(&losses),
            decomposed,
            bias_part,
            variance_part,
            variance_part_se: standard_error(&spreads),
            difference: empirical_mse - decomposed,
            count: k,
        })
    }
}

/// Standard error of the mean: sample standard deviation / sqrt(count).
/// Zero for a single value.
pub(crate) fn standard_error(values: &[f64]) -> f64 {
    let k = values.len();
    if k < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}

//! The Bayesian reading of the regularized problem.
//!
//! Relabel the penalty as a Gaussian prior — `beta R -> prior_cov^{-1}`,
//! `m0 -> prior mean` — and the estimator becomes the posterior mean while
//! `H^{-1}` becomes the posterior covariance
//! `post_cov = (prior_cov^{-1} + H_misfit)^{-1}`. The Bayes risk of the
//! posterior mean under squared loss is then exactly `tr(post_cov)`, and the
//! identity behind that statement,
//! `tr(post_cov prior_cov^{-1} post_cov) + tr(post_cov H_misfit post_cov) = tr(post_cov)`,
//! is exposed as an executable check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{spd_factorize, AffineMap, CholFactor, GaussianMeasure};
use crate::problem::{LinearForwardModel, ProblemInstance, RegularizationSpec};

/// Condition bound below which the construction-time inverse identity is
/// enforced at 1e-10 relative Frobenius error.
const CONTRACT_CONDITION_BOUND: f64 = 1e6;

/// Gaussian posterior of a linear-Gaussian inverse problem.
#[derive(Debug, Clone)]
pub struct Posterior {
    prior: GaussianMeasure,
    model: LinearForwardModel,
    post_cov: DMatrix<f64>,
    post_chol: CholFactor,
    precision_chol: CholFactor,
    misfit_hessian: DMatrix<f64>,
    condition_estimate: f64,
}

/// The two left-hand traces of the Bayes-risk identity and their mismatch
/// against `tr(post_cov)`.
#[derive(Debug, Clone, Copy)]
pub struct TraceIdentityReport {
    /// `tr(post_cov prior_cov^{-1} post_cov)` — the prior-expected bias term.
    pub bias_term: f64,
    /// `tr(post_cov H_misfit post_cov)` — the data-variance term.
    pub variance_term: f64,
    /// `tr(post_cov)`.
    pub rhs: f64,
    /// `|bias_term + variance_term - rhs|`.
    pub residual: f64,
}

impl Posterior {
    /// Condition the prior on the data model:
    /// `post_cov = (prior_cov^{-1} + H_misfit)^{-1}` via factored solves.
    pub fn from_prior(model: LinearForwardModel, prior: GaussianMeasure) -> Result<Self> {
        let n = model.param_dim();
        if prior.dim() != n {
            return Err(Error::dim("prior vs parameter dimension", n, prior.dim()));
        }
        let misfit_hessian = model.misfit_hessian();
        let prior_precision = prior.solve_covariance(&DMatrix::identity(n, n))?;
        let raw_precision = &prior_precision + &misfit_hessian;
        let (precision, precision_chol) = spd_factorize(&raw_precision, "posterior precision")?;
        let raw_cov = precision_chol.solve(&DMatrix::identity(n, n));
        let (post_cov, post_chol) = spd_factorize(&raw_cov, "posterior covariance")?;

        let eigenvalues = post_cov.symmetric_eigenvalues();
        let condition_estimate = eigenvalues.max() / eigenvalues.min();

        if condition_estimate <= CONTRACT_CONDITION_BOUND {
            let roundtrip = post_chol.solve(&DMatrix::identity(n, n));
            let defect = (&roundtrip - &precision).norm() / precision.norm();
            if defect > 1e-10 {
                return Err(Error::ConstructionCheck {
                    context: "posterior covariance".into(),
                    detail: format!(
                        "inverse identity defect {defect:.3e} exceeds 1e-10 at condition {condition_estimate:.3e}"
                    ),
                });
            }
        }
        let (prior_trace, post_trace) = (prior.covariance().trace(), post_cov.trace());
        if post_trace > prior_trace * (1.0 + 1e-10) {
            return Err(Error::ConstructionCheck {
                context: "posterior covariance".into(),
                detail: format!(
                    "trace {post_trace:.6e} exceeds prior trace {prior_trace:.6e}"
                ),
            });
        }

        Ok(Posterior {
            prior,
            model,
            post_cov,
            post_chol,
            precision_chol,
            misfit_hessian,
            condition_estimate,
        })
    }

    pub fn prior(&self) -> &GaussianMeasure {
        &self.prior
    }

    pub fn model(&self) -> &LinearForwardModel {
        &self.model
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.post_cov
    }

    pub fn factor(&self) -> DMatrix<f64> {
        self.post_chol.l()
    }

    pub fn misfit_hessian(&self) -> &DMatrix<f64> {
        &self.misfit_hessian
    }

    pub fn dim(&self) -> usize {
        self.post_cov.nrows()
    }

    /// Estimated condition number of the posterior covariance. The 1e-10
    /// identity contracts apply below 1e6.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Posterior mean for data `y`:
    /// `post_cov (F^T noise_cov^{-1} y + prior_cov^{-1} prior_mean)`.
    pub fn mean(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.model.data_dim() {
            return Err(Error::dim("data vector length", self.model.data_dim(), y.len()));
        }
        let weighted = self.model.noise_law().solve_covariance_vec(y)?;
        let rhs = self.model.forward().transpose() * weighted
            + self.prior.solve_covariance_vec(self.prior.mean())?;
        Ok(self.precision_chol.solve(&rhs))
    }

    /// Bayes risk of the posterior mean under squared loss: `tr(post_cov)`.
    pub fn bayes_risk_analytic(&self) -> f64 {
        self.post_cov.trace()
    }

    /// Evaluate both sides of the Bayes-risk trace identity in symmetric form.
    pub fn trace_identity_report(&self) -> TraceIdentityReport {
        let bias_term = self.prior_weighted_trace();
        let variance_term = self.misfit_weighted_trace();
        let rhs = self.post_cov.trace();
        TraceIdentityReport {
            bias_term,
            variance_term,
            rhs,
            residual: (bias_term + variance_term - rhs).abs(),
        }
    }

    /// `tr(post_cov prior_cov^{-1} post_cov)`.
    fn prior_weighted_trace(&self) -> f64 {
        let s = self
            .prior
            .solve_covariance(&self.post_cov)
            .expect("posterior and prior dimensions agree");
        self.post_cov.dot(&s)
    }

    /// `tr(post_cov H_misfit post_cov)`.
    fn misfit_weighted_trace(&self) -> f64 {
        self.post_cov.dot(&(&self.misfit_hessian * &self.post_cov))
    }

    /// MSE of the posterior mean at a fixed truth `m`:
    /// `||post_cov prior_cov^{-1} (m - prior_mean)||^2 + tr(post_cov^2 H_misfit)`.
    pub fn bayesian_mse_analytic(&self, m: &DVector<f64>) -> Result<crate::estimator::MseBreakdown> {
        if m.len() != self.dim() {
            return Err(Error::dim("truth vector length", self.dim(), m.len()));
        }
        let weighted = self.prior.solve_covariance_vec(&(m - self.prior.mean()))?;
        let bias_sq = self.precision_chol.solve(&weighted).norm_squared();
        let variance_trace = self.misfit_weighted_trace();
        Ok(crate::estimator::MseBreakdown {
            total: bias_sq + variance_trace,
            bias_sq,
            variance_trace,
        })
    }

    /// Prior expectation of the squared bias, evaluated through the
    /// pushforward chain: the bias map `m -> post_cov prior_cov^{-1} (m - prior_mean)`
    /// sends the prior to `N(0, post_cov prior_cov^{-1} post_cov)`, whose
    /// second moment is the desired `tr(post_cov prior_cov^{-1} post_cov)`.
    pub fn prior_expected_bias_sq(&self) -> Result<f64> {
        let s = self.prior.solve_covariance(&self.post_cov)?;
        let bias_matrix = s.transpose();
        let shift = -(&bias_matrix * self.prior.mean());
        let map = AffineMap::new(bias_matrix, shift)?;
        let pushed = self.prior.pushforward(&map)?;
        Ok(pushed.second_moment())
    }
}

/// Read a quadratic penalty as a Gaussian prior: `N(m0, (beta R)^{-1})`.
pub fn prior_from_regularization(reg: &RegularizationSpec) -> Result<GaussianMeasure> {
    let n = reg.dim();
    let inv = reg.solve_reg(&DMatrix::identity(n, n))? / reg.beta();
    GaussianMeasure::new(reg.reference().clone(), inv)
}

/// Posterior of an instance under the prior implied by its regularization.
pub fn posterior_from_instance(instance: &ProblemInstance) -> Result<Posterior> {
    let prior = prior_from_regularization(instance.regularization())?;
    Posterior::from_prior(instance.model().clone(), prior)
}

//! Inverse-problem instances: forward operator, noise model, regularization,
//! plus reproducible toy builders.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::GaussianMeasure;
use crate::rng::{sub_seed, DrawRng};

// Sub-seed tags for the random-instance builder, so its draws never collide
// with sampling streams that reuse the same user seed.
const TAG_FORWARD: u64 = 0x11;
const TAG_NOISE: u64 = 0x12;
const TAG_REG: u64 = 0x13;
const TAG_TRUTH: u64 = 0x14;

/// Linear data model `y = F m + eta` with `eta ~ N(0, noise_cov)`.
#[derive(Debug, Clone)]
pub struct LinearForwardModel {
    forward: DMatrix<f64>,
    noise: GaussianMeasure,
}

impl LinearForwardModel {
    pub fn new(forward: DMatrix<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        let (d, n) = forward.shape();
        if d == 0 || n == 0 {
            return Err(Error::param("forward", "must have at least one row and column"));
        }
        if noise_cov.nrows() != d {
            return Err(Error::dim("noise covariance vs data dimension", d, noise_cov.nrows()));
        }
        let noise = GaussianMeasure::new(DVector::zeros(d), noise_cov)?;
        Ok(LinearForwardModel { forward, noise })
    }

    pub fn forward(&self) -> &DMatrix<f64> {
        &self.forward
    }

    pub fn noise_cov(&self) -> &DMatrix<f64> {
        self.noise.covariance()
    }

    pub fn noise_cov_factor(&self) -> &DMatrix<f64> {
        self.noise.factor()
    }

    /// The noise law N(0, noise_cov), sharing the cached factorization.
    pub fn noise_law(&self) -> &GaussianMeasure {
        &self.noise
    }

    pub fn data_dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn param_dim(&self) -> usize {
        self.forward.ncols()
    }

    /// Data-misfit Hessian `F^T noise_cov^{-1} F`, symmetrized.
    ///
    /// The noise inverse is applied through the cached factor, never formed.
    pub fn misfit_hessian(&self) -> DMatrix<f64> {
        let weighted = self
            .noise
            .solve_covariance(&self.forward)
            .expect("forward matrix rows match noise dimension by construction");
        let h = self.forward.transpose() * weighted;
        (&h + h.transpose()) * 0.5
    }
}

/// Quadratic penalty `beta/2 (m - reference)^T reg (m - reference)`.
#[derive(Debug, Clone)]
pub struct RegularizationSpec {
    beta: f64,
    reg: DMatrix<f64>,
    reg_law: GaussianMeasure,
    reference: DVector<f64>,
}

impl RegularizationSpec {
    pub fn new(beta: f64, reg: DMatrix<f64>, reference: DVector<f64>) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta", format!("must be a positive real, got {beta}")));
        }
        if reg.nrows() != reference.len() {
            return Err(Error::dim(
                "regularization operator vs reference length",
                reference.len(),
                reg.nrows(),
            ));
        }
        // Reuse the measure type purely for its SPD gate and cached factor.
        let reg_law = GaussianMeasure::new(DVector::zeros(reg.nrows()), reg)?;
        let reg = reg_law.covariance().clone();
        Ok(RegularizationSpec {
            beta,
            reg,
            reg_law,
            reference,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn reg(&self) -> &DMatrix<f64> {
        &self.reg
    }

    pub fn reference(&self) -> &DVector<f64> {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.reference.len()
    }

    /// Solve `reg * x = rhs` through the cached factor.
    pub fn solve_reg(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.reg_law.solve_covariance(rhs)
    }
}

/// A complete instance: model, penalty, and (optionally) the truth used by
/// frequentist risk studies.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    model: LinearForwardModel,
    regularization: RegularizationSpec,
    truth: Option<DVector<f64>>,
}

impl ProblemInstance {
    pub fn new(
        model: LinearForwardModel,
        regularization: RegularizationSpec,
        truth: Option<DVector<f64>>,
    ) -> Result<Self> {
        if regularization.dim() != model.param_dim() {
            return Err(Error::dim(
                "regularization vs parameter dimension",
                model.param_dim(),
                regularization.dim(),
            ));
        }
        if let Some(m) = &truth {
            if m.len() != model.param_dim() {
                return Err(Error::dim("truth vs parameter dimension", model.param_dim(), m.len()));
            }
        }
        Ok(ProblemInstance {
            model,
            regularization,
            truth,
        })
    }

    pub fn model(&self) -> &LinearForwardModel {
        &self.model
    }

    pub fn regularization(&self) -> &RegularizationSpec {
        &self.regularization
    }

    pub fn truth(&self) -> Option<&DVector<f64>> {
        self.truth.as_ref()
    }

    pub fn param_dim(&self) -> usize {
        self.model.param_dim()
    }

    pub fn data_dim(&self) -> usize {
        self.model.data_dim()
    }

    /// Same instance with a different regularization strength.
    pub fn with_beta(self, beta: f64) -> Result<Self> {
        let regularization = RegularizationSpec::new(
            beta,
            self.regularization.reg.clone(),
            self.regularization.reference.clone(),
        )?;
        ProblemInstance::new(self.model, regularization, self.truth)
    }

    pub fn with_truth(self, truth: DVector<f64>) -> Result<Self> {
        ProblemInstance::new(self.model, self.regularization, Some(truth))
    }

    /// Draw one data realization `y = F m + eta`, deterministic in `seed`.
    pub fn simulate_data(&self, m: &DVector<f64>, seed: u64) -> Result<DVector<f64>> {
        if m.len() != self.param_dim() {
            return Err(Error::dim("parameter vector length", self.param_dim(), m.len()));
        }
        let noise = self.model.noise_law().sample(1, seed)?;
        Ok(self.model.forward() * m + &noise.draws()[0])
    }
}

/// Periodic 1-D Gaussian-blur deconvolution on `n` grid points.
///
/// The forward matrix is circulant with nonnegative rows summing to one;
/// `kernel_width` (in grid points) is the ill-posedness knob. The truth is a
/// fixed smooth bump at x = 0.3 plus a unit step at x = 0.6 on the unit grid.
/// The builder is fully deterministic; `seed` is accepted so all builders
/// share one calling convention.
pub fn make_deconvolution(
    n: usize,
    kernel_width: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let _ = seed;
    if n < 4 {
        return Err(Error::param("n", format!("deconvolution needs n >= 4, got {n}")));
    }
    if !(kernel_width.is_finite() && kernel_width > 0.0) {
        return Err(Error::param("kernel_width", "must be positive"));
    }
    if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
        return Err(Error::param("noise_sigma", "must be positive"));
    }

    let mut weights = DVector::zeros(n);
    for k in 0..n {
        let dist = k.min(n - k) as f64;
        weights[k] = (-dist * dist / (2.0 * kernel_width * kernel_width)).exp();
    }
    weights /= weights.sum();
    let forward = DMatrix::from_fn(n, n, |i, j| weights[(i + n - j) % n]);

    let truth = DVector::from_fn(n, |j, _| {
        let x = j as f64 / n as f64;
        let bump = (-(x - 0.3) * (x - 0.3) / 0.01).exp();
        let step = if x >= 0.6 { 1.0 } else { 0.0 };
        bump + step
    });

    let model =
        LinearForwardModel::new(forward, DMatrix::identity(n, n) * noise_sigma * noise_sigma)?;
    let regularization = RegularizationSpec::new(1.0, DMatrix::identity(n, n), DVector::zeros(n))?;
    ProblemInstance::new(model, regularization, Some(truth))
}

/// Random dense instance: `F` with N(0, 1)/sqrt(d) entries, random SPD noise
/// and regularization operators (`G^T G / dim + 0.1 I`), zero reference,
/// standard-normal truth. Bit-deterministic in `seed`.
pub fn make_random_instance(n: usize, d: usize, seed: u64) -> Result<ProblemInstance> {
    if n == 0 || d == 0 {
        return Err(Error::param("n, d", "must be at least 1"));
    }
    let forward = {
        let mut rng = DrawRng::new(sub_seed(seed, TAG_FORWARD), 0);
        let scale = 1.0 / (d as f64).sqrt();
        DMatrix::from_fn(d, n, |_, _| rng.standard_normal() * scale)
    };
    let noise_cov = random_spd(d, sub_seed(seed, TAG_NOISE));
    let reg = random_spd(n, sub_seed(seed, TAG_REG));
    let truth = {
        let mut rng = DrawRng::new(sub_seed(seed, TAG_TRUTH), 0);
        DVector::from_fn(n, |_, _| rng.standard_normal())
    };

    let model = LinearForwardModel::new(forward, noise_cov)?;
    let regularization = RegularizationSpec::new(1.0, reg, DVector::zeros(n))?;
    ProblemInstance::new(model, regularization, Some(truth))
}

/// `G^T G / dim + 0.1 I` for Gaussian `G`: SPD with bounded condition number.
fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = DrawRng::new(seed, 0);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.standard_normal());
    g.transpose() * &g / dim as f64 + DMatrix::identity(dim, dim) * 0.1
}

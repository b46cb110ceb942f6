//! Finite-dimensional Gaussian measures.
//!
//! A [`GaussianMeasure`] is a mean vector plus a symmetric positive definite
//! covariance with a cached lower Cholesky factor. Everything downstream
//! (noise laws, priors, posteriors, pushforward laws) reuses this one type,
//! and every covariance in the crate passes through the same SPD gate:
//! symmetry check at 1e-12 relative Frobenius error, symmetrization, Cholesky,
//! one jitter retry of `1e-12 * tr(Q)/n * I`, then a hard error naming the
//! offending eigenvalue.

use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::DrawRng;

pub(crate) type CholFactor = nalgebra::Cholesky<f64, Dyn>;

const SYMMETRY_RTOL: f64 = 1e-12;
const JITTER_SCALE: f64 = 1e-12;

/// Symmetry-check, symmetrize, factorize; one jitter retry on failure.
///
/// Returns the matrix that was actually factorized (symmetrized, plus jitter
/// if it was needed) together with its Cholesky factorization.
pub(crate) fn spd_factorize(
    matrix: &DMatrix<f64>,
    context: &str,
) -> Result<(DMatrix<f64>, CholFactor)> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::dim(
            format!("{context} (square matrix required)"),
            n.max(1),
            matrix.ncols(),
        ));
    }
    let norm = matrix.norm();
    let asymmetry = (matrix - matrix.transpose()).norm();
    if asymmetry > SYMMETRY_RTOL * norm {
        return Err(Error::NotSymmetric {
            context: context.to_string(),
            asymmetry: asymmetry / norm,
        });
    }
    let sym = (matrix + matrix.transpose()) * 0.5;
    if let Some(chol) = nalgebra::Cholesky::new(sym.clone()) {
        return Ok((sym, chol));
    }
    let jitter = JITTER_SCALE * sym.trace() / n as f64;
    let jittered = &sym + DMatrix::identity(n, n) * jitter;
    if let Some(chol) = nalgebra::Cholesky::new(jittered.clone()) {
        return Ok((jittered, chol));
    }
    let min_eigenvalue = jittered
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Err(Error::NotPositiveDefinite {
        context: context.to_string(),
        min_eigenvalue,
        jitter,
    })
}

/// A Gaussian measure N(mean, covariance) on R^n.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    chol: CholFactor,
}

impl GaussianMeasure {
    /// Build a measure, running the covariance through the SPD gate.
    ///
    /// The stored covariance is the symmetrized (and, if the gate needed it,
    /// jittered) matrix, so `factor * factor^T` reconstructs it to rounding.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() {
            return Err(Error::dim(
                "covariance rows vs mean length",
                mean.len(),
                covariance.nrows(),
            ));
        }
        let (covariance, chol) = spd_factorize(&covariance, "covariance")?;
        let factor = chol.l();
        Ok(GaussianMeasure {
            mean,
            covariance,
            factor,
            chol,
        })
    }

    /// The standard normal N(0, I_n).
    pub fn standard(n: usize) -> Self {
        GaussianMeasure::new(DVector::zeros(n), DMatrix::identity(n, n))
            .expect("identity covariance is SPD")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Cached lower-triangular Cholesky factor of the covariance.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Solve `covariance * X = rhs` via the cached factorization.
    pub fn solve_covariance(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.dim() {
            return Err(Error::dim("covariance solve rhs rows", self.dim(), rhs.nrows()));
        }
        Ok(self.chol.solve(rhs))
    }

    /// Solve `covariance * x = rhs` for a vector right-hand side.
    pub fn solve_covariance_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::dim("covariance solve rhs length", self.dim(), rhs.len()));
        }
        Ok(self.chol.solve(rhs))
    }

    /// The law of `x -> A x + s` under this measure: N(A c + s, A Q A^T).
    pub fn pushforward(&self, map: &AffineMap) -> Result<GaussianMeasure> {
        if map.input_dim() != self.dim() {
            return Err(Error::dim(
                "affine map input vs measure dimension",
                self.dim(),
                map.input_dim(),
            ));
        }
        let mean = map.matrix() * &self.mean + map.shift();
        let covariance = map.matrix() * &self.covariance * map.matrix().transpose();
        GaussianMeasure::new(mean, covariance)
    }

    /// Draw `count` independent realizations, one ChaCha stream per draw index.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        let n = self.dim();
        let draws = (0..count)
            .map(|i| {
                let mut rng = DrawRng::new(seed, i as u64);
                let xi = DVector::from_fn(n, |_, _| rng.standard_normal());
                &self.mean + &self.factor * xi
            })
            .collect();
        Ok(SampleBatch {
            draws,
            seed,
            count,
        })
    }

    /// E‖x‖² = tr(Q) + ‖c‖².
    pub fn second_moment(&self) -> f64 {
        self.covariance.trace() + self.mean.norm_squared()
    }

    /// Fourier transform of the measure at frequency `h`:
    /// exp(i⟨h, c⟩ − ½⟨Q h, h⟩). Modulus is at most 1.
    pub fn characteristic_function(&self, h: &DVector<f64>) -> Result<Complex64> {
        if h.len() != self.dim() {
            return Err(Error::dim("frequency vector length", self.dim(), h.len()));
        }
        let quad = (&self.covariance * h).dot(h);
        let phase = h.dot(&self.mean);
        let amplitude = (-0.5 * quad).exp();
        Ok(Complex64::new(
            amplitude * phase.cos(),
            amplitude * phase.sin(),
        ))
    }
}

/// The affine map x -> matrix * x + shift.
#[derive(Debug, Clone)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    shift: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, shift: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != shift.len() {
            return Err(Error::dim(
                "affine map matrix rows vs shift length",
                shift.len(),
                matrix.nrows(),
            ));
        }
        Ok(AffineMap { matrix, shift })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            matrix: DMatrix::identity(n, n),
            shift: DVector::zeros(n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::dim("affine map input length", self.input_dim(), x.len()));
        }
        Ok(&self.matrix * x + &self.shift)
    }

    /// Composition: first apply `self`, then `next`.
    pub fn then(&self, next: &AffineMap) -> Result<AffineMap> {
        if next.input_dim() != self.output_dim() {
            return Err(Error::dim(
                "affine map composition",
                self.output_dim(),
                next.input_dim(),
            ));
        }
        AffineMap::new(
            next.matrix() * self.matrix(),
            next.matrix() * self.shift() + next.shift(),
        )
    }
}

/// A reproducible batch of draws: same `(measure, count, seed)` regenerates
/// the same bytes.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    draws: Vec<DVector<f64>>,
    seed: u64,
    count: usize,
}

impl SampleBatch {
    /// Wrap externally produced draws (e.g. mapped realizations).
    pub fn from_draws(draws: Vec<DVector<f64>>, seed: u64) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::param("draws", "must be non-empty"));
        }
        let dim = draws[0].len();
        if draws.iter().any(|d| d.len() != dim) {
            return Err(Error::dim("sample batch draw dimensions", dim, 0));
        }
        let count = draws.len();
        Ok(SampleBatch { draws, seed, count })
    }

    pub fn draws(&self) -> &[DVector<f64>] {
        &self.draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.draws[0].len()
    }
}

/// Sample mean and unbiased sample covariance (count − 1 denominator).
pub fn empirical_moments(batch: &SampleBatch) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = batch.count();
    if k < 2 {
        return Err(Error::InsufficientSamples {
            count: k,
            required: 2,
        });
    }
    let n = batch.dim();
    let mut mean = DVector::zeros(n);
    for draw in batch.draws() {
        mean += draw;
    }
    mean /= k as f64;
    let mut cov = DMatrix::zeros(n, n);
    for draw in batch.draws() {
        let centered = draw - &mean;
        cov.syger(1.0, &centered, &centered, 1.0);
    }
    cov /= (k - 1) as f64;
    // syger fills only the lower triangle; mirror it.
    for i in 0..n {
        for j in (i + 1)..n {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    Ok((mean, cov))
}

//! A-optimal sensor selection.
//!
//! Choose `k` rows from a candidate observation pool to minimize the Bayes
//! risk `tr(post_cov)`. The greedy pass evaluates each candidate through the
//! rank-one Woodbury downdate
//! `post_cov - (post_cov f^T)(f post_cov) / (sigma^2 + f post_cov f^T)`
//! and re-factorizes from scratch every 32 commits to cap drift; an
//! exhaustive search over all subsets certifies small pools.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::GaussianMeasure;
use crate::posterior::Posterior;
use crate::problem::LinearForwardModel;

/// Greedy steps between from-scratch re-factorizations of the covariance.
const REFACTOR_INTERVAL: usize = 32;

/// Subset budget for the exhaustive optimizer.
const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

/// Candidate observation rows with independent per-row noise variances.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    rows: Vec<DVector<f64>>,
    noise_vars: Vec<f64>,
    labels: Vec<String>,
}

impl CandidatePool {
    /// `rows` pairs each observation row with its noise variance. When
    /// `labels` is `None`, candidates are labeled by index.
    pub fn new(rows: Vec<(DVector<f64>, f64)>, labels: Option<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("rows", "candidate pool must be non-empty"));
        }
        let dim = rows[0].0.len();
        for (i, (row, var)) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::dim(format!("candidate row {i}"), dim, row.len()));
            }
            if !(var.is_finite() && *var > 0.0) {
                return Err(Error::param(
                    format!("noise_var[{i}]"),
                    format!("must be positive, got {var}"),
                ));
            }
        }
        let labels = match labels {
            Some(labels) => {
                if labels.len() != rows.len() {
                    return Err(Error::dim("labels vs rows", rows.len(), labels.len()));
                }
                labels
            }
            None => (0..rows.len()).map(|i| format!("c{i}")).collect(),
        };
        let (rows, noise_vars) = rows.into_iter().unzip();
        Ok(CandidatePool {
            rows,
            noise_vars,
            labels,
        })
    }

    /// One candidate per forward-model row, with the diagonal of the noise
    /// covariance as per-row variances. Requires independent noise.
    pub fn from_forward_rows(model: &LinearForwardModel) -> Result<Self> {
        let cov = model.noise_cov();
        let d = model.data_dim();
        let off_diag: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| cov[(i, j)].abs()))
            .fold(0.0, f64::max);
        if off_diag > 1e-12 * cov.norm() {
            return Err(Error::param(
                "noise_cov",
                "candidate pools need per-row independent noise (diagonal covariance)",
            ));
        }
        let rows = (0..d)
            .map(|i| (model.forward().row(i).transpose(), cov[(i, i)]))
            .collect();
        CandidatePool::new(rows, None)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &DVector<f64> {
        &self.rows[i]
    }

    pub fn noise_var(&self, i: usize) -> f64 {
        self.noise_vars[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        for (pos, &idx) in subset.iter().enumerate() {
            if idx >= self.len() {
                return Err(Error::InvalidIndex {
                    index: idx,
                    reason: format!("pool has {} candidates", self.len()),
                });
            }
            if subset[..pos].contains(&idx) {
                return Err(Error::InvalidIndex {
                    index: idx,
                    reason: "candidate repeated in subset".into(),
                });
            }
        }
        Ok(())
    }

    /// Stack a subset of candidates into a forward model with diagonal noise.
    pub fn assemble_model(&self, subset: &[usize]) -> Result<LinearForwardModel> {
        self.check_subset(subset)?;
        if subset.is_empty() {
            return Err(Error::param("subset", "cannot assemble an empty model"));
        }
        let n = self.dim();
        let mut forward = DMatrix::zeros(subset.len(), n);
        let mut noise = DMatrix::zeros(subset.len(), subset.len());
        for (r, &idx) in subset.iter().enumerate() {
            forward.row_mut(r).copy_from(&self.rows[idx].transpose());
            noise[(r, r)] = self.noise_vars[idx];
        }
        LinearForwardModel::new(forward, noise)
    }
}

/// Result of a selection run: the picked indices, the trace objective after
/// each pick (nonincreasing), and the posterior of the final design.
#[derive(Debug, Clone)]
pub struct DesignSelection {
    pub chosen: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub final_posterior: Posterior,
}

impl DesignSelection {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("selection always picks at least one candidate")
    }

    pub fn labels<'a>(&self, pool: &'a CandidatePool) -> Vec<&'a str> {
        self.chosen.iter().map(|&i| pool.label(i)).collect()
    }
}

/// The A-optimality criterion value for a subset: `tr(post_cov)` of the
/// posterior built from those rows. The empty subset scores `tr(prior_cov)`.
pub fn trace_after_design(
    pool: &CandidatePool,
    prior: &GaussianMeasure,
    subset: &[usize],
) -> Result<f64> {
    pool.check_subset(subset)?;
    if pool.dim() != prior.dim() {
        return Err(Error::dim("pool rows vs prior dimension", prior.dim(), pool.dim()));
    }
    if subset.is_empty() {
        return Ok(prior.covariance().trace());
    }
    let model = pool.assemble_model(subset)?;
    Ok(Posterior::from_prior(model, prior.clone())?.bayes_risk_analytic())
}

/// Rank-one observation update of a posterior covariance: condition on one
/// extra row `f` with noise variance `sigma^2`.
pub fn rank_one_update(
    post_cov: &DMatrix<f64>,
    row: &DVector<f64>,
    noise_var: f64,
) -> Result<DMatrix<f64>> {
    if row.len() != post_cov.nrows() {
        return Err(Error::dim("update row length", post_cov.nrows(), row.len()));
    }
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::param("noise_var", "must be positive"));
    }
    let v = post_cov * row;
    let denom = noise_var + row.dot(&v);
    let updated = post_cov - &v * v.transpose() / denom;
    Ok((&updated + updated.transpose()) * 0.5)
}

/// Greedily pick `k` candidates, each step minimizing the updated trace.
/// Ties break toward the lowest candidate index.
pub fn greedy_select(
    pool: &CandidatePool,
    prior: &GaussianMeasure,
    k: usize,
) -> Result<DesignSelection> {
    validate_k(pool, k)?;
    if pool.dim() != prior.dim() {
        return Err(Error::dim("pool rows vs prior dimension", prior.dim(), pool.dim()));
    }

    let mut cov = prior.covariance().clone();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut objective_trace = Vec::with_capacity(k);

    for step in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for idx in 0..pool.len() {
            if chosen.contains(&idx) {
                continue;
            }
            let v = &cov * pool.row(idx);
            let denom = pool.noise_var(idx) + pool.row(idx).dot(&v);
            let trial_trace = cov.trace() - v.norm_squared() / denom;
            // Strict comparison keeps the lowest index on exact ties.
            if best.is_none_or(|(_, t)| trial_trace < t) {
                best = Some((idx, trial_trace));
            }
        }
        let (idx, _) = best.expect("k <= pool size leaves a candidate available");
        cov = rank_one_update(&cov, pool.row(idx), pool.noise_var(idx))?;
        chosen.push(idx);
        if (step + 1) % REFACTOR_INTERVAL == 0 && step + 1 < k {
            let model = pool.assemble_model(&chosen)?;
            cov = Posterior::from_prior(model, prior.clone())?.covariance().clone();
        }
        objective_trace.push(cov.trace());
    }

    let final_posterior = Posterior::from_prior(pool.assemble_model(&chosen)?, prior.clone())?;
    Ok(DesignSelection {
        chosen,
        objective_trace,
        final_posterior,
    })
}

/// Certify by brute force: evaluate every `k`-subset and keep the minimizer
/// (lexicographically smallest on ties). Errors when `C(pool, k)` exceeds
/// the 10^6 budget.
pub fn exhaustive_select(
    pool: &CandidatePool,
    prior: &GaussianMeasure,
    k: usize,
) -> Result<DesignSelection> {
    validate_k(pool, k)?;
    let combinations = binomial(pool.len(), k);
    if combinations > EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            pool_size: pool.len(),
            k,
            combinations,
            limit: EXHAUSTIVE_BUDGET,
        });
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..pool.len()).combinations(k) {
        let trace = trace_after_design(pool, prior, &subset)?;
        // Strict comparison keeps the lexicographically first minimizer.
        if best.as_ref().is_none_or(|(_, t)| trace < *t) {
            best = Some((subset, trace));
        }
    }
    let (chosen, _) = best.expect("k >= 1 guarantees at least one subset");

    let objective_trace = (1..=k)
        .map(|t| trace_after_design(pool, prior, &chosen[..t]))
        .collect::<Result<Vec<f64>>>()?;
    let final_posterior = Posterior::from_prior(pool.assemble_model(&chosen)?, prior.clone())?;
    Ok(DesignSelection {
        chosen,
        objective_trace,
        final_posterior,
    })
}

fn validate_k(pool: &CandidatePool, k: usize) -> Result<()> {
    if k == 0 || k > pool.len() {
        return Err(Error::param(
            "k",
            format!("must satisfy 1 <= k <= {}, got {k}", pool.len()),
        ));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

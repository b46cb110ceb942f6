//! Run configuration: a single JSON document describing the problem, the
//! study to execute, and sampling controls. CLI flags override file fields.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{
    make_deconvolution, make_random_instance, LinearForwardModel, ProblemInstance,
    RegularizationSpec,
};

/// The five named studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Risk,
    BayesRisk,
    Verify,
    Oed,
    PushforwardCheck,
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::Risk => "risk",
            Study::BayesRisk => "bayes-risk",
            Study::Verify => "verify",
            Study::Oed => "oed",
            Study::PushforwardCheck => "pushforward-check",
        }
    }
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Problem description: a named builder or explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Periodic 1-D Gaussian-blur deconvolution.
    Deconvolution {
        n: usize,
        kernel_width: f64,
        noise_sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Seeded dense random instance.
    Random {
        n: usize,
        d: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit matrices as nested arrays.
    Explicit {
        forward: Vec<Vec<f64>>,
        noise_cov: Vec<Vec<f64>>,
        reg: Vec<Vec<f64>>,
        #[serde(default = "default_beta")]
        beta: f64,
        /// Reference parameter m0; zeros when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<Vec<f64>>,
        /// Underlying truth for frequentist studies.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truth: Option<Vec<f64>>,
    },
}

fn default_beta() -> f64 {
    1.0
}

/// Candidate pool for the `oed` study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PoolConfig {
    /// Use the rows of the problem's forward matrix with its (diagonal)
    /// noise variances.
    ForwardRows,
    /// Explicit rows and per-row noise variances.
    Explicit {
        rows: Vec<Vec<f64>>,
        noise_vars: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OedConfig {
    /// Number of candidates to select.
    pub k: usize,
    pub pool: PoolConfig,
}

/// A fully described run. In a config file `study` may be omitted and
/// supplied by the CLI subcommand instead; flags override file fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the problem's regularization strength when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<ReportFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed: Option<OedConfig>,
}

fn default_samples() -> usize {
    100_000
}

impl RunConfig {
    /// Parse a JSON config; serde errors keep their line/column diagnostics.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn study(&self) -> Result<Study> {
        self.study.ok_or_else(|| {
            Error::Config("no study selected: set \"study\" in the config or use a subcommand".into())
        })
    }

    /// Structural validation ahead of any computation.
    pub fn validate(&self) -> Result<()> {
        let study = self.study()?;
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if study == Study::Oed && self.oed.is_none() {
            return Err(Error::Config(
                "the oed study needs an \"oed\" section (k and pool)".into(),
            ));
        }
        if let Some(beta) = self.beta {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::Config(format!("beta must be a positive real, got {beta}")));
            }
        }
        Ok(())
    }

    /// Build the problem instance, applying the beta override.
    pub fn build_instance(&self) -> Result<ProblemInstance> {
        let instance = self.problem.build()?;
        match self.beta {
            Some(beta) => instance.with_beta(beta),
            None => Ok(instance),
        }
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            ProblemConfig::Deconvolution {
                n,
                kernel_width,
                noise_sigma,
                seed,
            } => make_deconvolution(*n, *kernel_width, *noise_sigma, *seed),
            ProblemConfig::Random { n, d, seed } => make_random_instance(*n, *d, *seed),
            ProblemConfig::Explicit {
                forward,
                noise_cov,
                reg,
                beta,
                reference,
                truth,
            } => {
                let forward = matrix_from_rows(forward, "forward")?;
                let n = forward.ncols();
                let model = LinearForwardModel::new(forward, matrix_from_rows(noise_cov, "noise_cov")?)?;
                let reference = match reference {
                    Some(v) => DVector::from_row_slice(v),
                    None => DVector::zeros(n),
                };
                let regularization =
                    RegularizationSpec::new(*beta, matrix_from_rows(reg, "reg")?, reference)?;
                let truth = truth.as_ref().map(|v| DVector::from_row_slice(v));
                ProblemInstance::new(model, regularization, truth)
            }
        }
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Config(format!("matrix {name} must have at least one row")));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Config(format!("matrix {name} must have at least one column")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("matrix {name} has ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

//! Machine-readable study reports: analytic values, Monte Carlo records,
//! per-check verdicts with named tolerances, and a determinism hash over
//! everything except the provenance block.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::{ReportFormat, RunConfig, Study};

/// One scalar Monte Carlo estimate, named for the quantity it checks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McRecord {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
    pub count: usize,
    pub seed: u64,
}

/// One pass/fail verdict. `pass` means `|analytic - observed| <= tolerance`
/// (or `observed <= tolerance` for pure bound checks with no analytic side);
/// `tolerance_name` identifies the rule that produced the bound.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckVerdict {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
    pub observed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub tolerance: f64,
    pub tolerance_name: String,
    pub pass: bool,
}

impl CheckVerdict {
    /// Two-sided comparison of an analytic value against an observation.
    pub fn difference(
        name: &str,
        analytic: f64,
        observed: f64,
        std_error: Option<f64>,
        tolerance: f64,
        tolerance_name: &str,
    ) -> Self {
        let observed = finite_or_max(observed);
        CheckVerdict {
            name: name.into(),
            analytic: Some(analytic),
            observed,
            std_error,
            tolerance,
            tolerance_name: tolerance_name.into(),
            pass: (analytic - observed).abs() <= tolerance,
        }
    }

    /// Bound check on a single nonnegative quantity.
    pub fn bound(name: &str, observed: f64, tolerance: f64, tolerance_name: &str) -> Self {
        let observed = finite_or_max(observed);
        CheckVerdict {
            name: name.into(),
            analytic: None,
            observed,
            std_error: None,
            tolerance,
            tolerance_name: tolerance_name.into(),
            pass: observed <= tolerance,
        }
    }
}

/// Reports must stay JSON-round-trippable, so infinities (e.g. a zero
/// standard error under a degenerate batch) are clamped to MAX and fail.
fn finite_or_max(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Serialized Gaussian measure (mean + covariance as nested arrays).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureRecord {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl MeasureRecord {
    pub fn from_measure(measure: &crate::gaussian::GaussianMeasure) -> Self {
        let n = measure.dim();
        MeasureRecord {
            mean: measure.mean().iter().cloned().collect(),
            covariance: (0..n)
                .map(|i| (0..n).map(|j| measure.covariance()[(i, j)]).collect())
                .collect(),
        }
    }
}

/// Closed-form quantities computed by a study. Fields are populated per
/// study; absent values are omitted from the serialized report.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct AnalyticValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse_bias_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse_variance_trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior_trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_identity_bias_term: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_identity_variance_term: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_identity_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_expected_bias_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<MeasureRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_moment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_forward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_posterior: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed_chosen: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed_objective_trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed_exhaustive_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oed_optimality_gap: Option<f64>,
}

/// Run metadata excluded from the determinism hash.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub config: RunConfig,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub wall_clock_ms: f64,
}

/// Full study report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RiskReport {
    pub study: Study,
    pub analytic: AnalyticValues,
    pub monte_carlo: Vec<McRecord>,
    pub checks: Vec<CheckVerdict>,
    /// SHA-256 over the canonical serialization of (study, analytic,
    /// monte_carlo, checks); provenance is excluded.
    pub determinism_hash: String,
    pub provenance: Provenance,
}

impl RiskReport {
    pub fn assemble(
        study: Study,
        analytic: AnalyticValues,
        monte_carlo: Vec<McRecord>,
        checks: Vec<CheckVerdict>,
        config: &RunConfig,
        wall_clock_ms: f64,
    ) -> Self {
        let determinism_hash = determinism_hash(&study, &analytic, &monte_carlo, &checks);
        let mut versions = BTreeMap::new();
        versions.insert("gaussrisk".to_string(), env!("CARGO_PKG_VERSION").to_string());
        RiskReport {
            study,
            analytic,
            monte_carlo,
            checks,
            determinism_hash,
            provenance: Provenance {
                config: config.clone(),
                seed: config.seed,
                versions,
                wall_clock_ms,
            },
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Serialize)]
struct DeterministicCore<'a> {
    study: &'a Study,
    analytic: &'a AnalyticValues,
    monte_carlo: &'a [McRecord],
    checks: &'a [CheckVerdict],
}

fn determinism_hash(
    study: &Study,
    analytic: &AnalyticValues,
    monte_carlo: &[McRecord],
    checks: &[CheckVerdict],
) -> String {
    let core = DeterministicCore {
        study,
        analytic,
        monte_carlo,
        checks,
    };
    let bytes = serde_json::to_vec(&core).expect("report core serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write the report to `path`. JSON carries the full structure; CSV is the
/// flat per-check table `(check, analytic, mc_value, std_error, tolerance,
/// verdict)`.
pub fn emit(report: &RiskReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => {
            let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
            json.push('\n');
            json
        }
        ReportFormat::Csv => to_csv(report),
    };
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_csv(report: &RiskReport) -> String {
    let mut out = String::from("check,analytic,mc_value,std_error,tolerance,verdict\n");
    for check in &report.checks {
        let analytic = check.analytic.map(fmt17).unwrap_or_default();
        let std_error = check.std_error.map(fmt17).unwrap_or_default();
        let verdict = if check.pass { "pass" } else { "fail" };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            check.name,
            analytic,
            fmt17(check.observed),
            std_error,
            fmt17(check.tolerance),
            verdict
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> RiskReport {
        let config = RunConfig::from_json(
            r#"{"problem": {"builder": "random", "n": 2, "d": 2}, "study": "risk"}"#,
        )
        .unwrap();
        let checks = vec![
            CheckVerdict::difference("alpha", 0.5, 0.501, Some(0.01), 0.04, "four_std_errors"),
            CheckVerdict::bound("beta", 1e-12, 1e-10, "relative_1e-10"),
        ];
        RiskReport::assemble(
            Study::Risk,
            AnalyticValues {
                mse_total: Some(0.5),
                ..Default::default()
            },
            vec![McRecord {
                name: "risk".into(),
                value: 0.501,
                std_error: 0.01,
                count: 1000,
                seed: 0,
            }],
            checks,
            &config,
            12.5,
        )
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let report = sample_report();
        let json = serde_json::to_string(&report).unwrap();
        let back: RiskReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn hash_ignores_provenance_timings() {
        let mut a = sample_report();
        let b = sample_report();
        a.provenance.wall_clock_ms = 9999.0;
        assert_eq!(a.determinism_hash, b.determinism_hash);
    }

    #[test]
    fn hash_tracks_check_values() {
        let a = sample_report();
        let mut b = sample_report();
        b.checks[0].observed = 0.6;
        let rehashed = determinism_hash(&b.study, &b.analytic, &b.monte_carlo, &b.checks);
        assert_ne!(a.determinism_hash, rehashed);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let report = sample_report();
        let csv = to_csv(&report);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + report.checks.len());
        assert!(lines[1].starts_with("alpha,5.0000000000000000e-1,"));
        assert!(lines[2].ends_with("pass"));
    }

    #[test]
    fn seventeen_digit_format_roundtrips() {
        for v in [0.5, 1.0 / 3.0, 2.0f64.sqrt(), 1e-13] {
            let parsed: f64 = fmt17(v).parse().unwrap();
            assert_eq!(parsed, v);
        }
    }

    #[test]
    fn infinite_observed_fails_closed() {
        let check = CheckVerdict::bound("gamma", f64::INFINITY, 4.0, "four_std_errors");
        assert!(!check.pass);
        assert!(check.observed.is_finite());
    }
}

//! Experiment runner: parse a problem config, execute a named study, and
//! emit a machine-readable report.
//!
//! Studies: `risk` (exact MSE/bias vs Monte Carlo), `bayes-risk` (trace
//! identity and Bayes risk vs nested Monte Carlo), `pushforward-check`
//! (Gaussian-layer identities), `verify` (all of the above), and `oed`
//! (A-optimal sensor selection). Every comparison becomes a named verdict;
//! a run passes only if every verdict passes.

mod config;
mod report;
mod studies;

pub use config::{OedConfig, PoolConfig, ProblemConfig, ReportFormat, RunConfig, Study};
pub use report::{
    emit, AnalyticValues, CheckVerdict, McRecord, MeasureRecord, Provenance, RiskReport,
};
pub use studies::run;

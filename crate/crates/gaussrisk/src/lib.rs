//! Risk calculus for discretized linear-Gaussian inverse problems.
//!
//! Given a linear forward operator `F`, additive Gaussian noise and a
//! quadratic (Tikhonov) penalty, this crate computes the regularized
//! least-squares estimator together with its exact bias and mean-squared
//! error, the Bayesian posterior obtained by reading the penalty as a
//! Gaussian prior, the Bayes risk identity `Risk = tr(Γ_post)`, and an
//! A-optimal greedy sensor-selection routine driven by that trace criterion.
//! Every closed form ships next to an independent seeded Monte Carlo
//! estimate so the algebra can be cross-checked at runtime.
//!
//! The crate is organized around the `examples/` directory (one runnable
//! example per capability) plus a thin `gaussrisk` binary that executes
//! named studies from a JSON config and emits machine-readable reports.
//!
//! Reproducibility: all sampling is ChaCha12 keyed by a 64-bit seed with one
//! stream per draw index; see [`rng`] for the exact contract.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod montecarlo;
pub mod oed;
pub mod posterior;
pub mod problem;
pub mod rng;

pub use error::{Error, Result};

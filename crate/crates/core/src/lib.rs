//! Monte Carlo simulation of stochastic Majorana noise on a Bacon-Shor code
//! built from tetron islands.
//!
//! Modules, bottom-up:
//! - [`frame`]: packed Majorana strings, GF(2) matrices, island parities.
//! - [`bacon_shor`]: the d×d code, its MZM layouts, schedule and decoder.
//! - [`noise`]: the Qp, QpBf, MC and PMC noise models and the long-lived
//!   excitation variant.
//! - [`physical`]: device parameters to noise-model parameters.
//! - [`engine`]: Monte Carlo, importance sampling and fault-tolerance checks.
//! - [`analysis`]: confidence intervals, pseudo-thresholds and sweeps.
//! - [`config`]: the flat key=value experiment configuration.

pub mod analysis;
pub mod bacon_shor;
pub mod config;
pub mod engine;
pub mod error;
pub mod frame;
pub mod noise;
pub mod physical;

pub use error::{Error, Result};

//! Simulation of time-selective, frequency-flat massive-MIMO uplink channels
//! and their estimation with ensemble square-root filters, a particle-wise
//! update variant and a bootstrap particle filter.
//!
//! - [`model`]: ground-truth channels, pilots and observations.
//! - [`filters`]: the estimators and the exact Kalman reference.
//! - [`experiments`]: Monte Carlo harness and error metrics.
//! - [`report`]: CSV output.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod model;
pub mod report;
pub mod selftest;

pub use config::{parse_config, parse_config_onto, InnerUpdate, Part, SystemConfig};
pub use error::{Error, Result};

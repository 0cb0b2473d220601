//! Monte Carlo harness: tracking over blocks, convergence over inner
//! iterations, and comparison against the exact Kalman reference.

mod bank;
mod metrics;
mod parallel;
mod scenario;
mod studies;

use std::collections::BTreeMap;
use std::fmt;

use crate::config::Part;

pub use bank::{BankParams, Estimates, FilterBank};
pub use metrics::{rmse_series, sample_variance_series};
pub use parallel::{map_runs, map_runs_sequential};
pub use scenario::{run_seed, stream_rng, Stream, UserScenario};
pub use studies::{
    aggregate, run_convergence_experiment, run_oracle_comparison, run_tracking_experiment,
    simulate_run, ConvergenceResult, OracleDeviation, OracleReport, Trace, TrackingResult,
};

/// Estimator label; the derived order is the CSV row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Ensrf,
    Ls,
    Oracle,
    Puensrf,
    Sir,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ensrf,
        Algorithm::Ls,
        Algorithm::Oracle,
        Algorithm::Puensrf,
        Algorithm::Sir,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Ensrf => "ensrf",
            Algorithm::Ls => "ls",
            Algorithm::Oracle => "oracle",
            Algorithm::Puensrf => "puensrf",
            Algorithm::Sir => "sir",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.label() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Block,
    Iteration,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::Block => "block",
            Axis::Iteration => "iteration",
        }
    }
}

/// Per-index RMSE and sample variance of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub algorithm: Algorithm,
    pub axis: Axis,
    pub index: Vec<usize>,
    pub rmse: Vec<f64>,
    pub sample_variance: Vec<f64>,
    /// 1-based `(antenna, user)`.
    pub coefficient: (usize, usize),
    pub part: Part,
}

impl MetricsSeries {
    pub fn mean_rmse(&self) -> f64 {
        mean(&self.rmse)
    }

    pub fn mean_sample_variance(&self) -> f64 {
        mean(&self.sample_variance)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Truth and per-estimator values of the tracked coefficient along one axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeriesRecord {
    pub truth: Vec<f64>,
    pub estimates: BTreeMap<Algorithm, Vec<f64>>,
}

impl SeriesRecord {
    fn push(&mut self, truth: f64, values: [(Algorithm, f64); 5]) {
        self.truth.push(truth);
        for (a, v) in values {
            self.estimates.entry(a).or_default().push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

/// Everything one Monte Carlo run contributes to the metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    /// Final estimate of every block.
    pub blocks: SeriesRecord,
    /// Estimates after every inner iteration of block 1.
    pub iterations: SeriesRecord,
}

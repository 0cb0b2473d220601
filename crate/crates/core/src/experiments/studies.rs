use nalgebra::{DMatrix, DVector};

use super::bank::{BankParams, FilterBank};
use super::parallel::map_runs;
use super::scenario::UserScenario;
use super::{metrics, Algorithm, Axis, MetricsSeries, RunRecord, SeriesRecord};
use crate::config::{Part, SystemConfig};
use crate::error::Result;
use crate::model::composite_index;

/// Simulates run `run_index` and records the coefficient `coeff` (1-based
/// `(antenna, user)`) for every block and for every inner iteration of
/// block 1.
pub fn simulate_run(
    cfg: &SystemConfig,
    run_index: usize,
    coeff: (usize, usize),
) -> Result<RunRecord> {
    let user = coeff.1 - 1;
    let idx = composite_index(cfg.n_rx, coeff.0 - 1, cfg.part);
    let scenario = UserScenario::simulate(cfg, run_index, user)?;
    let mut bank = FilterBank::new(BankParams::from(cfg), &scenario)?;
    let mut blocks = SeriesRecord::default();
    let mut iterations = SeriesRecord::default();

    let truth1 = scenario.truth[0][idx];
    let ls1 = scenario.ls[0][idx];

    for (b, y) in scenario.measurements.iter().enumerate() {
        let record_iters = b == 0;
        bank.run_block(y, |_, bank| {
            if record_iters {
                iterations.push(truth1, snapshot(bank, idx, ls1));
            }
        })?;
        blocks.push(
            scenario.truth[b][idx],
            snapshot(&bank, idx, scenario.ls[b][idx]),
        );
    }
    Ok(RunRecord {
        run_index,
        seed: scenario.seed,
        blocks,
        iterations,
    })
}

fn snapshot(bank: &FilterBank, idx: usize, ls: f64) -> [(Algorithm, f64); 5] {
    [
        (Algorithm::Ensrf, bank.ensrf.members.row(idx).mean()),
        (Algorithm::Ls, ls),
        (Algorithm::Oracle, bank.oracle.mean[idx]),
        (Algorithm::Puensrf, bank.puensrf.members.row(idx).mean()),
        (
            Algorithm::Sir,
            (bank.sir.particles.row(idx) * &bank.sir.weights)[0],
        ),
    ]
}

/// Cross-run RMSE and sample variance for every estimator, in
/// [`Algorithm`] order.
pub fn aggregate<'a, I>(
    records: I,
    axis: Axis,
    first_index: usize,
    coefficient: (usize, usize),
    part: Part,
) -> Result<Vec<MetricsSeries>>
where
    I: IntoIterator<Item = &'a SeriesRecord>,
{
    let records: Vec<&SeriesRecord> = records.into_iter().collect();
    let truth: Vec<Vec<f64>> = records.iter().map(|r| r.truth.clone()).collect();
    let len = truth.first().map_or(0, Vec::len);
    Algorithm::ALL
        .into_iter()
        .map(|algorithm| {
            let est: Vec<Vec<f64>> = records
                .iter()
                .map(|r| r.estimates.get(&algorithm).cloned().unwrap_or_default())
                .collect();
            Ok(MetricsSeries {
                algorithm,
                axis,
                index: (first_index..first_index + len).collect(),
                rmse: metrics::rmse_series(&truth, &est)?,
                sample_variance: metrics::sample_variance_series(&est)?,
                coefficient,
                part,
            })
        })
        .collect()
}

/// Truth-vs-estimate trace of the tracked coefficient in run 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub coefficient: (usize, usize),
    pub part: Part,
    pub truth: Vec<f64>,
    pub sir: Vec<f64>,
    pub ensrf: Vec<f64>,
    pub puensrf: Vec<f64>,
}

impl Trace {
    fn from_record(r: &SeriesRecord, coefficient: (usize, usize), part: Part) -> Self {
        let get = |a| r.estimates.get(&a).cloned().unwrap_or_default();
        Self {
            coefficient,
            part,
            truth: r.truth.clone(),
            sir: get(Algorithm::Sir),
            ensrf: get(Algorithm::Ensrf),
            puensrf: get(Algorithm::Puensrf),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    /// Per-block metrics.
    pub tracking: Vec<MetricsSeries>,
    /// Per-iteration metrics of block 1 of the same runs.
    pub convergence: Vec<MetricsSeries>,
    pub trace: Trace,
    pub records: Vec<RunRecord>,
}

/// Tracking study over `n_blocks` blocks for `cfg.track_coeff`.
pub fn run_tracking_experiment(cfg: &SystemConfig) -> Result<TrackingResult> {
    cfg.validate()?;
    let coeff = cfg.track_coeff;
    let records = map_runs(cfg.n_mc_runs, |m| simulate_run(cfg, m, coeff))?;
    let tracking = aggregate(
        records.iter().map(|r| &r.blocks),
        Axis::Block,
        1,
        coeff,
        cfg.part,
    )?;
    let convergence = aggregate(
        records.iter().map(|r| &r.iterations),
        Axis::Iteration,
        1,
        coeff,
        cfg.part,
    )?;
    let trace = Trace::from_record(&records[0].blocks, coeff, cfg.part);
    Ok(TrackingResult {
        tracking,
        convergence,
        trace,
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    /// Per-iteration metrics, iterations `1..=n_inner_iters`.
    pub series: Vec<MetricsSeries>,
    /// Truth value of the tracked coefficient in run 0.
    pub truth_run0: f64,
    pub records: Vec<RunRecord>,
}

/// Convergence study: block 1 only, metrics after every inner iteration for
/// `cfg.converge_coeff`.
pub fn run_convergence_experiment(cfg: &SystemConfig) -> Result<ConvergenceResult> {
    cfg.validate()?;
    let cfg = SystemConfig {
        n_blocks: 1,
        ..cfg.clone()
    };
    let coeff = cfg.converge_coeff;
    let records = map_runs(cfg.n_mc_runs, |m| simulate_run(&cfg, m, coeff))?;
    let series = aggregate(
        records.iter().map(|r| &r.iterations),
        Axis::Iteration,
        1,
        coeff,
        cfg.part,
    )?;
    Ok(ConvergenceResult {
        series,
        truth_run0: records[0].iterations.truth[0],
        records,
    })
}

/// Deviation of one estimator's posterior mean from the Kalman reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDeviation {
    pub algorithm: Algorithm,
    /// Per block: RMS over runs of `‖m − m_KF‖_rms / σ_KF`.
    pub per_block: Vec<f64>,
    /// RMS over all blocks and runs.
    pub overall: f64,
    /// Per block: mean over runs of `tr(P_filter) / tr(P_KF)`; NaN for LS.
    pub spread_ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub deviations: Vec<OracleDeviation>,
    /// Largest mean gap between particle-wise and square-root analyses of a
    /// shared forecast, over all runs and steps.
    pub shared_forecast_gap: f64,
    /// RMS over blocks and runs of the LS error against the truth, per real
    /// component.
    pub ls_error_rms: f64,
    pub n_runs: usize,
}

impl OracleReport {
    pub fn get(&self, algorithm: Algorithm) -> Option<&OracleDeviation> {
        self.deviations.iter().find(|d| d.algorithm == algorithm)
    }
}

struct OracleRun {
    // [algorithm][block] normalized deviation and spread ratio
    dev: Vec<Vec<f64>>,
    spread: Vec<Vec<f64>>,
    gap: f64,
    ls_sq: f64,
}

const ORACLE_ALGOS: [Algorithm; 4] = [
    Algorithm::Ensrf,
    Algorithm::Puensrf,
    Algorithm::Sir,
    Algorithm::Ls,
];

/// Compares every estimator's posterior mean with the exact Kalman filter,
/// block by block, for the user of `cfg.track_coeff`. Runs play the role of
/// seeds.
pub fn run_oracle_comparison(cfg: &SystemConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let user = cfg.track_coeff.1 - 1;
    let runs = map_runs(cfg.n_mc_runs, |m| {
        let scenario = UserScenario::simulate(cfg, m, user)?;
        let mut bank = FilterBank::new(BankParams::from(cfg), &scenario)?;
        bank.check_shared_forecast = true;
        let mut out = OracleRun {
            dev: vec![Vec::new(); ORACLE_ALGOS.len()],
            spread: vec![Vec::new(); ORACLE_ALGOS.len()],
            gap: 0.0,
            ls_sq: 0.0,
        };
        for (b, y) in scenario.measurements.iter().enumerate() {
            bank.run_block(y, |_, _| {})?;
            let oracle = &bank.oracle;
            let dim = oracle.mean.len() as f64;
            let tr_kf = oracle.cov.trace();
            let sigma = (tr_kf / dim).sqrt();
            let est = bank.estimates();
            let means = [&est.ensrf, &est.puensrf, &est.sir, &scenario.ls[b]];
            let traces = [
                ensemble_trace(&bank.ensrf.members),
                ensemble_trace(&bank.puensrf.members),
                weighted_trace(&bank.sir.particles, &bank.sir.weights),
                f64::NAN,
            ];
            for (i, (m, tr)) in means.iter().zip(traces).enumerate() {
                let rms = ((*m - &oracle.mean).norm_squared() / dim).sqrt();
                out.dev[i].push(rms / sigma);
                out.spread[i].push(tr / tr_kf);
            }
            out.ls_sq += (&scenario.ls[b] - &scenario.truth[b]).norm_squared() / dim;
        }
        out.gap = bank.shared_forecast_gap;
        out.ls_sq /= scenario.n_blocks() as f64;
        Ok(out)
    })?;

    let n_runs = runs.len();
    let n_blocks = runs[0].dev[0].len();
    let deviations = ORACLE_ALGOS
        .iter()
        .enumerate()
        .map(|(i, &algorithm)| {
            let per_block: Vec<f64> = (0..n_blocks)
                .map(|b| {
                    let s: f64 = runs.iter().map(|r| r.dev[i][b].powi(2)).sum();
                    (s / n_runs as f64).sqrt()
                })
                .collect();
            let overall = (per_block.iter().map(|v| v * v).sum::<f64>() / n_blocks as f64).sqrt();
            let spread_ratio = (0..n_blocks)
                .map(|b| runs.iter().map(|r| r.spread[i][b]).sum::<f64>() / n_runs as f64)
                .collect();
            OracleDeviation {
                algorithm,
                per_block,
                overall,
                spread_ratio,
            }
        })
        .collect();
    Ok(OracleReport {
        deviations,
        shared_forecast_gap: runs.iter().map(|r| r.gap).fold(0.0, f64::max),
        ls_error_rms: (runs.iter().map(|r| r.ls_sq).sum::<f64>() / n_runs as f64).sqrt(),
        n_runs,
    })
}

fn ensemble_trace(members: &DMatrix<f64>) -> f64 {
    let n = members.ncols() as f64;
    members
        .row_iter()
        .map(|row| {
            let m = row.mean();
            row.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .sum()
}

fn weighted_trace(particles: &DMatrix<f64>, weights: &DVector<f64>) -> f64 {
    particles
        .row_iter()
        .map(|row| {
            let m = (row * weights)[0];
            row.iter()
                .zip(weights.iter())
                .map(|(v, w)| w * (v - m).powi(2))
                .sum::<f64>()
        })
        .sum()
}

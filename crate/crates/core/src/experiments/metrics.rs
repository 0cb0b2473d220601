//! Cross-run error metrics.
//!
//! Every per-index reduction sorts its terms before summing, so the result is
//! bit-identical under any permutation of the runs.

use crate::error::{invalid, Error, Result};

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn check_lengths(rows: &[Vec<f64>], len: usize, what: &str) -> Result<()> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != len) {
        return Err(Error::Dimension(format!(
            "{what} of run {i} has length {}, expected {len}",
            r.len()
        )));
    }
    Ok(())
}

/// `RMSE[k] = sqrt(mean_m (g_m[k] − ĝ_m[k])²)`, each run scored against its
/// own truth.
pub fn rmse_series(truth: &[Vec<f64>], estimates: &[Vec<f64>]) -> Result<Vec<f64>> {
    if estimates.is_empty() {
        return Err(invalid("estimates", "need at least one run"));
    }
    if truth.len() != estimates.len() {
        return Err(Error::Dimension(format!(
            "{} truth rows for {} estimate rows",
            truth.len(),
            estimates.len()
        )));
    }
    let len = estimates[0].len();
    check_lengths(estimates, len, "estimate series")?;
    check_lengths(truth, len, "truth series")?;
    let n = estimates.len() as f64;
    Ok((0..len)
        .map(|k| {
            let sq = truth
                .iter()
                .zip(estimates)
                .map(|(g, e)| (g[k] - e[k]).powi(2))
                .collect();
            (sorted_sum(sq) / n).sqrt()
        })
        .collect())
}

/// Unbiased cross-run sample variance of the estimates at every index.
pub fn sample_variance_series(estimates: &[Vec<f64>]) -> Result<Vec<f64>> {
    if estimates.len() < 2 {
        return Err(invalid(
            "n_mc_runs",
            "sample variance needs at least 2 runs",
        ));
    }
    let len = estimates[0].len();
    check_lengths(estimates, len, "estimate series")?;
    let n = estimates.len() as f64;
    Ok((0..len)
        .map(|k| {
            let mean = sorted_sum(estimates.iter().map(|e| e[k]).collect()) / n;
            let dev = estimates.iter().map(|e| (e[k] - mean).powi(2)).collect();
            sorted_sum(dev) / (n - 1.0)
        })
        .collect())
}

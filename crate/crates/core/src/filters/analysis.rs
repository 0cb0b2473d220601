//! Analysis (measurement update) steps of the two ensemble filters.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::ensemble::EnsembleStats;
use super::gain::GainContext;
use crate::error::{Error, Result};

/// Eigenvalues of the square-root argument may undershoot 0 (or, in the
/// observation-space route, overshoot 1) by this much before it is an error.
const PSD_SLACK: f64 = 1e-8;

/// Deterministic square-root analysis.
///
/// The mean follows the Kalman update `ḡᵃ = ḡᶠ + K(y − ȳᶠ)`; the perturbations
/// are `G̃ᵃ = G̃ᶠ T` with `T` the symmetric square root of
/// `I − Ỹᵀ D⁻¹ Ỹ`, so that `G̃ᵃ G̃ᵃᵀ = (G̃ᶠ − K Ỹ) G̃ᶠᵀ`. Returns the analysis
/// mean and the rebuilt member matrix.
pub fn ensrf_analysis(
    forecast: &EnsembleStats,
    observed: &EnsembleStats,
    gain: &GainContext,
    measurement: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_shapes(forecast, observed, gain, measurement)?;
    let mean = &forecast.mean + &gain.gain * (measurement - &observed.mean);
    let t = forecast.perturbations.ncols();
    let m = observed.perturbations.nrows();
    let analysis_pert = if t <= m {
        transform_ensemble_space(&forecast.perturbations, &observed.perturbations, gain)?
    } else {
        transform_observation_space(&forecast.perturbations, &observed.perturbations, gain)?
    };
    let scale = ((t - 1) as f64).sqrt();
    let mut members = analysis_pert * scale;
    for mut col in members.column_iter_mut() {
        col += &mean;
    }
    Ok((mean, members))
}

/// Particle-wise analysis `gᵃᵢ = gᶠᵢ + K(y − yᶠᵢ)` with one shared gain.
pub fn puensrf_analysis(
    forecast_members: &DMatrix<f64>,
    obs_members: &DMatrix<f64>,
    gain: &GainContext,
    measurement: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if forecast_members.ncols() != obs_members.ncols()
        || obs_members.nrows() != measurement.len()
        || gain.gain.shape() != (forecast_members.nrows(), measurement.len())
    {
        return Err(Error::Dimension(
            "forecast, observation ensemble, gain and measurement disagree".into(),
        ));
    }
    let mut innovations = -obs_members.clone();
    for mut col in innovations.column_iter_mut() {
        col += measurement;
    }
    Ok(forecast_members + &gain.gain * innovations)
}

fn check_shapes(
    forecast: &EnsembleStats,
    observed: &EnsembleStats,
    gain: &GainContext,
    measurement: &DVector<f64>,
) -> Result<()> {
    let n = forecast.mean.len();
    let m = measurement.len();
    if forecast.perturbations.ncols() != observed.perturbations.ncols()
        || observed.mean.len() != m
        || gain.gain.shape() != (n, m)
    {
        return Err(Error::Dimension(
            "forecast, observation statistics, gain and measurement disagree".into(),
        ));
    }
    Ok(())
}

/// `G̃ᶠ·sqrt(I − WᵀW)` via the `t × t` eigendecomposition, `W = L⁻¹Ỹ`.
pub(crate) fn transform_ensemble_space(
    state_pert: &DMatrix<f64>,
    obs_pert: &DMatrix<f64>,
    gain: &GainContext,
) -> Result<DMatrix<f64>> {
    let w = gain.whiten(obs_pert);
    let t = obs_pert.ncols();
    let mut arg = -(w.transpose() * &w);
    for i in 0..t {
        arg[(i, i)] += 1.0;
    }
    let eig = SymmetricEigen::new(symmetrize(arg));
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    if let Some(l) = eig.eigenvalues.iter().find(|&&l| l < -PSD_SLACK) {
        return Err(Error::Degenerate(format!(
            "square-root argument has eigenvalue {l:e}"
        )));
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, r) in scaled.column_iter_mut().zip(roots.iter()) {
        col *= *r;
    }
    let transform = scaled * v.transpose();
    Ok(state_pert * transform)
}

/// Same transform through the `m × m` eigendecomposition of `W Wᵀ`:
/// `sqrt(I − WᵀW) = I − Wᵀ V diag(1/(1 + sqrt(1 − λ))) Vᵀ W`.
pub(crate) fn transform_observation_space(
    state_pert: &DMatrix<f64>,
    obs_pert: &DMatrix<f64>,
    gain: &GainContext,
) -> Result<DMatrix<f64>> {
    let w = gain.whiten(obs_pert);
    let eig = SymmetricEigen::new(symmetrize(&w * w.transpose()));
    if let Some(l) = eig.eigenvalues.iter().find(|&&l| l > 1.0 + PSD_SLACK) {
        return Err(Error::Degenerate(format!(
            "square-root argument has eigenvalue {:e}",
            1.0 - l
        )));
    }
    let coef = eig
        .eigenvalues
        .map(|l| 1.0 / (1.0 + (1.0 - l.clamp(0.0, 1.0)).sqrt()));
    let vt_w = eig.eigenvectors.transpose() * &w;
    let mut left = state_pert * vt_w.transpose();
    for (mut col, c) in left.column_iter_mut().zip(coef.iter()) {
        col *= *c;
    }
    Ok(state_pert - left * vt_w)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

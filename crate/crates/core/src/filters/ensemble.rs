use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Ensemble of real-composite state vectors, one member per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: DMatrix<f64>,
    pub block_index: usize,
    pub user_index: usize,
}

/// Ensemble mean and scaled deviations `(g_i − ḡ)/√(t−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: DVector<f64>,
    pub perturbations: DMatrix<f64>,
}

/// Predicted observations of a forecast ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationEnsemble {
    pub members: DMatrix<f64>,
    pub stats: EnsembleStats,
}

impl Ensemble {
    pub fn new(members: DMatrix<f64>, block_index: usize, user_index: usize) -> Result<Self> {
        if members.ncols() < 2 {
            return Err(Error::InvalidEnsemble(members.ncols()));
        }
        if members.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite ensemble member".into()));
        }
        Ok(Self {
            members,
            block_index,
            user_index,
        })
    }

    /// `n` members drawn from `N(0, var·I)` in `dim` real dimensions.
    pub fn from_prior<R: Rng + ?Sized>(
        dim: usize,
        n: usize,
        var: f64,
        user_index: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let s = var.sqrt();
        let members = DMatrix::from_fn(dim, n, |_, _| s * rng.sample::<f64, _>(StandardNormal));
        Self::new(members, 1, user_index)
    }

    pub fn size(&self) -> usize {
        self.members.ncols()
    }

    pub fn dim(&self) -> usize {
        self.members.nrows()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.members.column_mean()
    }
}

pub fn ensemble_stats(ensemble: &Ensemble) -> Result<EnsembleStats> {
    stats_of(&ensemble.members)
}

pub(crate) fn stats_of(members: &DMatrix<f64>) -> Result<EnsembleStats> {
    let t = members.ncols();
    if t < 2 {
        return Err(Error::InvalidEnsemble(t));
    }
    let mean = members.column_mean();
    let scale = 1.0 / ((t - 1) as f64).sqrt();
    let mut perturbations = members.clone();
    for mut col in perturbations.column_iter_mut() {
        col -= &mean;
        col *= scale;
    }
    Ok(EnsembleStats {
        mean,
        perturbations,
    })
}

/// `P = G̃ G̃ᵀ`.
pub fn ensemble_covariance(stats: &EnsembleStats) -> DMatrix<f64> {
    &stats.perturbations * stats.perturbations.transpose()
}

/// Pseudo-dynamic step `g_i ← g_i + ζ_i`, `ζ_i ~ N(0, var·I)`.
pub fn pseudo_forecast<R: Rng + ?Sized>(
    ensemble: &mut Ensemble,
    pseudo_noise_var: f64,
    rng: &mut R,
) -> Result<()> {
    if !(pseudo_noise_var >= 0.0) {
        return Err(invalid("pseudo_noise_var", "must be >= 0"));
    }
    add_gaussian(&mut ensemble.members, pseudo_noise_var, rng);
    Ok(())
}

pub(crate) fn add_gaussian<R: Rng + ?Sized>(m: &mut DMatrix<f64>, var: f64, rng: &mut R) {
    if var == 0.0 {
        return;
    }
    let s = var.sqrt();
    for v in m.iter_mut() {
        *v += s * rng.sample::<f64, _>(StandardNormal);
    }
}

/// Applies the decorrelated measurement map `h(g) = √P_u·g` member-wise.
pub fn forecast_observations(
    forecast: &Ensemble,
    uplink_power_db: f64,
) -> Result<ObservationEnsemble> {
    let h = 10f64.powf(uplink_power_db / 20.0);
    let members = &forecast.members * h;
    let stats = stats_of(&members)?;
    Ok(ObservationEnsemble { members, stats })
}

/// Carries an analysis ensemble to the next block with the AR(1) model;
/// `beta` is the complex-entry variance, so each real component receives
/// innovation variance `β/2`.
pub fn block_forecast<R: Rng + ?Sized>(
    ensemble: &mut Ensemble,
    alpha: f64,
    beta: f64,
    rng: &mut R,
) -> Result<()> {
    evolve_members(&mut ensemble.members, alpha, beta, rng)?;
    ensemble.block_index += 1;
    Ok(())
}

pub(crate) fn evolve_members<R: Rng + ?Sized>(
    m: &mut DMatrix<f64>,
    alpha: f64,
    beta: f64,
    rng: &mut R,
) -> Result<()> {
    if !(alpha.abs() <= 1.0) {
        return Err(invalid("alpha", "must satisfy |alpha| <= 1"));
    }
    if !(beta >= 0.0) {
        return Err(invalid("beta", "must be >= 0"));
    }
    *m *= alpha;
    add_gaussian(m, (1.0 - alpha * alpha) * beta / 2.0, rng);
    Ok(())
}

//! Sampling importance resampling (bootstrap) particle filter.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::ensemble::{add_gaussian, evolve_members};
use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-8;

/// Weighted particle set, one particle per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub particles: DMatrix<f64>,
    pub weights: DVector<f64>,
    pub effective_sample_size: f64,
    /// Number of times every weight vanished and the cloud was reset to
    /// uniform weights.
    pub degenerate_resets: usize,
}

impl ParticleCloud {
    pub fn uniform(particles: DMatrix<f64>) -> Self {
        let n = particles.ncols();
        Self {
            particles,
            weights: DVector::from_element(n, 1.0 / n as f64),
            effective_sample_size: n as f64,
            degenerate_resets: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weighted posterior mean.
    pub fn mean(&self) -> DVector<f64> {
        &self.particles * &self.weights
    }

    fn reset_uniform(&mut self) {
        let n = self.len();
        self.weights.fill(1.0 / n as f64);
        self.effective_sample_size = n as f64;
    }
}

pub fn effective_sample_size(weights: &DVector<f64>) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Multiplies weights by the Gaussian likelihood of `measurement` under
/// `y = √P_u·g + v`, `v ~ N(0, σ²I)`, and renormalizes.
///
/// Accumulates in the log domain with the maximum subtracted before
/// exponentiation. If no particle keeps a finite weight the cloud is reset to
/// uniform weights and [`Error::DegenerateWeights`] is returned.
pub fn sir_weight_update(
    cloud: &mut ParticleCloud,
    measurement: &DVector<f64>,
    uplink_power_db: f64,
    obs_noise_var: f64,
) -> Result<()> {
    if measurement.len() != cloud.particles.nrows() {
        return Err(Error::Dimension(format!(
            "measurement has {} entries, particles have {}",
            measurement.len(),
            cloud.particles.nrows()
        )));
    }
    let h = 10f64.powf(uplink_power_db / 20.0);
    let inv_two_var = 0.5 / obs_noise_var;
    let log_w: Vec<f64> = cloud
        .particles
        .column_iter()
        .zip(cloud.weights.iter())
        .map(|(p, &w)| {
            let sq: f64 = p
                .iter()
                .zip(measurement.iter())
                .map(|(g, y)| (y - h * g).powi(2))
                .sum();
            w.ln() - sq * inv_two_var
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        cloud.reset_uniform();
        cloud.degenerate_resets += 1;
        return Err(Error::DegenerateWeights);
    }
    for (w, lw) in cloud.weights.iter_mut().zip(&log_w) {
        *w = (lw - max).exp();
    }
    let total = cloud.weights.sum();
    cloud.weights /= total;
    cloud.effective_sample_size = effective_sample_size(&cloud.weights);
    Ok(())
}

/// Systematic resampling: one uniform offset, `n` evenly spaced pointers.
pub fn systematic_resample<R: Rng + ?Sized>(
    weights: &DVector<f64>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let u: f64 = rng.gen();
    systematic_resample_with_offset(weights, u)
}

/// Systematic resampling with an explicit offset `u ∈ [0, 1)`.
pub fn systematic_resample_with_offset(weights: &DVector<f64>, u: f64) -> Result<Vec<usize>> {
    let total = weights.sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidWeights(total));
    }
    let n = weights.len();
    let mut indices = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut j = 0;
    for i in 0..n {
        let pointer = (i as f64 + u) / n as f64;
        while pointer >= cumulative && j + 1 < n {
            j += 1;
            cumulative += weights[j];
        }
        indices.push(j);
    }
    Ok(indices)
}

/// How particles move before a weight update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagation {
    /// No move (first update from the prior).
    Stay,
    /// Within-block pseudo-dynamic jitter with the given per-component
    /// variance.
    Jitter(f64),
    /// Across-block AR(1) transition.
    Block { alpha: f64, beta: f64 },
}

/// Outcome flags of one [`sir_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SirStepReport {
    pub resampled: bool,
    pub degenerate: bool,
}

/// Propagate, reweight, and resample when ESS drops below half the
/// particle count.
pub fn sir_step<R: Rng + ?Sized>(
    cloud: &mut ParticleCloud,
    measurement: &DVector<f64>,
    propagation: Propagation,
    uplink_power_db: f64,
    obs_noise_var: f64,
    rng: &mut R,
) -> Result<SirStepReport> {
    match propagation {
        Propagation::Stay => {}
        Propagation::Jitter(var) => add_gaussian(&mut cloud.particles, var, rng),
        Propagation::Block { alpha, beta } => {
            evolve_members(&mut cloud.particles, alpha, beta, rng)?
        }
    }
    let mut report = SirStepReport::default();
    match sir_weight_update(cloud, measurement, uplink_power_db, obs_noise_var) {
        Ok(()) => {}
        Err(Error::DegenerateWeights) => report.degenerate = true,
        Err(e) => return Err(e),
    }
    let n = cloud.len();
    if cloud.effective_sample_size < n as f64 / 2.0 {
        let idx = systematic_resample(&cloud.weights, rng)?;
        cloud.particles = cloud.particles.select_columns(&idx);
        cloud.reset_uniform();
        report.resampled = true;
    }
    Ok(report)
}

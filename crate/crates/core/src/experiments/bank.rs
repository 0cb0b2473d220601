//! Runs every estimator side by side over one user's blocks.

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use super::scenario::{stream_rng, Stream, UserScenario};
use crate::config::{InnerUpdate, SystemConfig};
use crate::error::Result;
use crate::filters::{
    block_forecast, ensrf_analysis, forecast_observations, isotropic_noise, kalman_gain,
    kalman_predict, kalman_update, pseudo_forecast, puensrf_analysis, sir_step, Ensemble,
    KalmanState, ParticleCloud, Propagation,
};

/// Algorithm-level parameters shared by all filters of a bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankParams {
    pub uplink_power_db: f64,
    pub noise_var: f64,
    pub n_ensemble: usize,
    pub n_particles: usize,
    pub n_inner_iters: usize,
    pub pseudo_noise_scale: f64,
    pub anneal_factor: f64,
    pub inner_update: InnerUpdate,
}

impl From<&SystemConfig> for BankParams {
    fn from(cfg: &SystemConfig) -> Self {
        Self {
            uplink_power_db: cfg.uplink_power_db,
            noise_var: cfg.noise_var,
            n_ensemble: cfg.n_ensemble,
            n_particles: cfg.n_particles,
            n_inner_iters: cfg.n_inner_iters,
            pseudo_noise_scale: cfg.pseudo_noise_scale,
            anneal_factor: cfg.anneal_factor,
            inner_update: cfg.inner_update,
        }
    }
}

impl BankParams {
    /// Per-real-component noise variance used by one inner iteration.
    pub fn iteration_noise_var(&self) -> f64 {
        let r = self.noise_var / 2.0;
        match self.inner_update {
            InnerUpdate::Repeated => r,
            InnerUpdate::Tempered => r * self.n_inner_iters as f64,
        }
    }

    /// Jitter variance at inner iteration `k` (1-based) for a user with
    /// large-scale coefficient `beta`.
    pub fn jitter_var(&self, beta: f64, k: usize) -> f64 {
        self.pseudo_noise_scale * beta * self.anneal_factor.powi(k as i32)
    }
}

/// EnSRF, PUEnSRF, SIR and the Kalman reference for one user, all started
/// from the same prior draw.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub params: BankParams,
    pub alpha: f64,
    pub beta: f64,
    pub ensrf: Ensemble,
    pub puensrf: Ensemble,
    pub sir: ParticleCloud,
    pub oracle: KalmanState,
    /// Largest gap between the particle-wise mean and the square-root mean
    /// when both analyses are applied to the same EnSRF forecast.
    pub shared_forecast_gap: f64,
    /// Compute [`Self::shared_forecast_gap`] on every EnSRF step.
    pub check_shared_forecast: bool,
    pub sir_resamples: usize,
    rng_ensrf: ChaCha8Rng,
    rng_puensrf: ChaCha8Rng,
    rng_sir: ChaCha8Rng,
    blocks_done: usize,
}

impl FilterBank {
    pub fn new(params: BankParams, scenario: &UserScenario) -> Result<Self> {
        let dim = 2 * scenario.n_rx;
        let prior_var = scenario.beta / 2.0;
        let mut prior = stream_rng(scenario.seed, Stream::Prior);
        let ens =
            Ensemble::from_prior(dim, params.n_ensemble, prior_var, scenario.user, &mut prior)?;
        let particles = Ensemble::from_prior(
            dim,
            params.n_particles.max(2),
            prior_var,
            scenario.user,
            &mut prior,
        )?
        .members
        .columns(0, params.n_particles)
        .into_owned();
        Ok(Self {
            params,
            alpha: scenario.alpha,
            beta: scenario.beta,
            puensrf: ens.clone(),
            ensrf: ens,
            sir: ParticleCloud::uniform(particles),
            oracle: KalmanState::isotropic(dim, prior_var),
            shared_forecast_gap: 0.0,
            check_shared_forecast: false,
            sir_resamples: 0,
            rng_ensrf: stream_rng(scenario.seed, Stream::Ensrf),
            rng_puensrf: stream_rng(scenario.seed, Stream::Puensrf),
            rng_sir: stream_rng(scenario.seed, Stream::Sir),
            blocks_done: 0,
        })
    }

    pub fn estimates(&self) -> Estimates {
        Estimates {
            ensrf: self.ensrf.mean(),
            puensrf: self.puensrf.mean(),
            sir: self.sir.mean(),
        }
    }

    /// Assimilates one block's measurement with `n_inner_iters` pseudo-dynamic
    /// iterations, calling `on_iter(k, self)` after iteration `k` (1-based).
    ///
    /// Iteration 1 of every block after the first propagates with the AR(1)
    /// block transition; later iterations use the annealed jitter. The
    /// Kalman reference takes a single exact predict/update per block.
    pub fn run_block<F>(&mut self, measurement: &DVector<f64>, mut on_iter: F) -> Result<()>
    where
        F: FnMut(usize, &Self),
    {
        let first_block = self.blocks_done == 0;
        let p = self.params;
        let r_exact = p.noise_var / 2.0;
        if !first_block {
            self.oracle = kalman_predict(&self.oracle, self.alpha, self.beta)?;
        }
        self.oracle = kalman_update(&self.oracle, measurement, p.uplink_power_db, r_exact)?;

        let r_iter = p.iteration_noise_var();
        for k in 1..=p.n_inner_iters {
            let propagation = match (k, first_block) {
                (1, true) => Propagation::Stay,
                (1, false) => Propagation::Block {
                    alpha: self.alpha,
                    beta: self.beta,
                },
                _ => Propagation::Jitter(p.jitter_var(self.beta, k)),
            };
            self.propagate_ensembles(propagation)?;
            self.ensrf_update(measurement, r_iter)?;
            self.puensrf_update(measurement, r_iter)?;
            let rep = sir_step(
                &mut self.sir,
                measurement,
                propagation,
                p.uplink_power_db,
                r_iter,
                &mut self.rng_sir,
            )?;
            self.sir_resamples += rep.resampled as usize;
            on_iter(k, self);
        }
        self.blocks_done += 1;
        Ok(())
    }

    fn propagate_ensembles(&mut self, propagation: Propagation) -> Result<()> {
        for (ens, rng) in [
            (&mut self.ensrf, &mut self.rng_ensrf),
            (&mut self.puensrf, &mut self.rng_puensrf),
        ] {
            match propagation {
                Propagation::Stay => {}
                Propagation::Jitter(var) => pseudo_forecast(ens, var, rng)?,
                Propagation::Block { alpha, beta } => block_forecast(ens, alpha, beta, rng)?,
            }
        }
        Ok(())
    }

    fn ensrf_update(&mut self, y: &DVector<f64>, r: f64) -> Result<()> {
        let p = self.params;
        let fs = crate::filters::ensemble_stats(&self.ensrf)?;
        let obs = forecast_observations(&self.ensrf, p.uplink_power_db)?;
        let gain = kalman_gain(
            &fs.perturbations,
            &obs.stats.perturbations,
            &isotropic_noise(y.len(), r),
        )?;
        let (mean, members) = ensrf_analysis(&fs, &obs.stats, &gain, y)?;
        if self.check_shared_forecast {
            let pu = puensrf_analysis(&self.ensrf.members, &obs.members, &gain, y)?;
            let gap = (pu.column_mean() - &mean).amax();
            self.shared_forecast_gap = self.shared_forecast_gap.max(gap);
        }
        self.ensrf.members = members;
        Ok(())
    }

    fn puensrf_update(&mut self, y: &DVector<f64>, r: f64) -> Result<()> {
        let p = self.params;
        let fs = crate::filters::ensemble_stats(&self.puensrf)?;
        let obs = forecast_observations(&self.puensrf, p.uplink_power_db)?;
        let gain = kalman_gain(
            &fs.perturbations,
            &obs.stats.perturbations,
            &isotropic_noise(y.len(), r),
        )?;
        self.puensrf.members = puensrf_analysis(&self.puensrf.members, &obs.members, &gain, y)?;
        Ok(())
    }
}

/// Posterior means of the three sampling filters.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub ensrf: DVector<f64>,
    pub puensrf: DVector<f64>,
    pub sir: DVector<f64>,
}

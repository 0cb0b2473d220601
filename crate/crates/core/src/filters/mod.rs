//! Channel estimators on real-composite state vectors: the ensemble square
//! root filter, its particle-wise variant, a bootstrap particle filter, the
//! exact Kalman reference and the least-squares baseline.

mod analysis;
mod ensemble;
mod gain;
mod kalman;
mod ls;
mod sir;

pub use analysis::{ensrf_analysis, puensrf_analysis};
pub use ensemble::{
    block_forecast, ensemble_covariance, ensemble_stats, forecast_observations, pseudo_forecast,
    Ensemble, EnsembleStats, ObservationEnsemble,
};
pub use gain::{isotropic_noise, kalman_gain, GainContext};
pub use kalman::{kalman_oracle_step, kalman_predict, kalman_update, KalmanState};
pub use ls::ls_estimate;
pub use sir::{
    effective_sample_size, sir_step, sir_weight_update, systematic_resample,
    systematic_resample_with_offset, ParticleCloud, Propagation, SirStepReport,
};

pub(crate) use ensemble::stats_of;

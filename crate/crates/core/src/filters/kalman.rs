//! Exact Bayes filter for the linear-Gaussian per-user model, used as the
//! reference the ensemble and particle filters are checked against.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl KalmanState {
    /// Zero-mean isotropic prior with per-component variance `var`.
    pub fn isotropic(dim: usize, var: f64) -> Self {
        Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::from_diagonal_element(dim, dim, var),
        }
    }

    /// Marginal posterior standard deviation of component `i`.
    pub fn std(&self, i: usize) -> f64 {
        self.cov[(i, i)].max(0.0).sqrt()
    }
}

/// AR(1) predict: `m ← α·m`, `P ← α²·P + (1−α²)·(β/2)·I`.
pub fn kalman_predict(state: &KalmanState, alpha: f64, beta: f64) -> Result<KalmanState> {
    if !(alpha.abs() <= 1.0) {
        return Err(invalid("alpha", "must satisfy |alpha| <= 1"));
    }
    let mut cov = &state.cov * (alpha * alpha);
    let q = (1.0 - alpha * alpha) * beta / 2.0;
    for i in 0..cov.nrows() {
        cov[(i, i)] += q;
    }
    Ok(KalmanState {
        mean: &state.mean * alpha,
        cov,
    })
}

/// Measurement update with `H = √P_u·I`, `R = σ²·I`, Joseph-form covariance.
pub fn kalman_update(
    state: &KalmanState,
    measurement: &DVector<f64>,
    uplink_power_db: f64,
    obs_noise_var: f64,
) -> Result<KalmanState> {
    let n = state.mean.len();
    if measurement.len() != n {
        return Err(Error::Dimension(format!(
            "measurement has {} entries, state has {n}",
            measurement.len()
        )));
    }
    if !(obs_noise_var > 0.0) {
        return Err(invalid("obs_noise_var", "must be > 0"));
    }
    if obs_noise_var.is_infinite() {
        return Ok(state.clone());
    }
    let h = 10f64.powf(uplink_power_db / 20.0);
    let mut s = &state.cov * (h * h);
    for i in 0..n {
        s[(i, i)] += obs_noise_var;
    }
    let chol = Cholesky::new(s).ok_or_else(|| {
        Error::Degenerate("innovation covariance is not positive definite".into())
    })?;
    // K = h·P·S⁻¹ = (S⁻¹·h·P)ᵀ
    let gain = chol.solve(&(&state.cov * h)).transpose();
    let innovation = measurement - &state.mean * h;
    let mean = &state.mean + &gain * innovation;
    let mut a = -(&gain * h);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let cov = &a * &state.cov * a.transpose() + (&gain * gain.transpose()) * obs_noise_var;
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(KalmanState { mean, cov })
}

/// One predict + update cycle.
pub fn kalman_oracle_step(
    state: &KalmanState,
    measurement: &DVector<f64>,
    alpha: f64,
    beta: f64,
    uplink_power_db: f64,
    obs_noise_var: f64,
) -> Result<KalmanState> {
    let predicted = kalman_predict(state, alpha, beta)?;
    kalman_update(&predicted, measurement, uplink_power_db, obs_noise_var)
}

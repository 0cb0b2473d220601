use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Kalman gain of one analysis step with the factorized innovation
/// covariance it was solved against.
#[derive(Debug, Clone)]
pub struct GainContext {
    /// `K = G̃ Ỹᵀ D⁻¹`, state × observation.
    pub gain: DMatrix<f64>,
    /// `D = Ỹ Ỹᵀ + R`.
    pub innovation_cov: DMatrix<f64>,
    /// Diagonal of `R`.
    pub obs_noise_cov: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl GainContext {
    /// `D⁻¹ b` through the stored factorization.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(b)
    }

    /// `L⁻¹ b` with `D = L Lᵀ`.
    pub(crate) fn whiten(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.factor.l_dirty();
        l.solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }
}

/// Diagonal observation noise with the same variance on every component.
pub fn isotropic_noise(dim: usize, var: f64) -> DVector<f64> {
    DVector::from_element(dim, var)
}

/// Ensemble Kalman gain from state and observation perturbations.
///
/// `D` is Cholesky-factorized and `K` obtained by a solve; `D` is never
/// inverted explicitly.
pub fn kalman_gain(
    state_perturbations: &DMatrix<f64>,
    obs_perturbations: &DMatrix<f64>,
    obs_noise_cov: &DVector<f64>,
) -> Result<GainContext> {
    if state_perturbations.ncols() != obs_perturbations.ncols() {
        return Err(Error::Dimension(format!(
            "state perturbations have {} columns, observation perturbations {}",
            state_perturbations.ncols(),
            obs_perturbations.ncols()
        )));
    }
    let m = obs_perturbations.nrows();
    if obs_noise_cov.len() != m {
        return Err(Error::Dimension(format!(
            "R has {} entries for {m} observations",
            obs_noise_cov.len()
        )));
    }
    let mut d = obs_perturbations * obs_perturbations.transpose();
    for (i, r) in obs_noise_cov.iter().enumerate() {
        d[(i, i)] += r;
    }
    let factor = Cholesky::new(d.clone()).ok_or_else(|| {
        Error::Degenerate("innovation covariance is not positive definite".into())
    })?;
    // K = G̃ (D⁻¹ Ỹ)ᵀ since D is symmetric
    let solved = factor.solve(obs_perturbations);
    let gain = state_perturbations * solved.transpose();
    Ok(GainContext {
        gain,
        innovation_cov: d,
        obs_noise_cov: obs_noise_cov.clone(),
        factor,
    })
}

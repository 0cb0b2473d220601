//! Ground-truth channel generation: large-scale fading, AR(1) small-scale
//! evolution, unitary pilots and noisy uplink observations.

mod bessel;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::{invalid, Error, Result};

pub use bessel::bessel_j0;

pub type CMatrix = DMatrix<Complex64>;

/// Speed of light used for the Doppler shift, in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// True channel matrices of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrajectory {
    /// Per-user large-scale coefficient, held fixed over all blocks.
    pub beta: Vec<f64>,
    /// `G_τ` for τ = 1..n_blocks, each `n_rx × n_tx`.
    pub g_blocks: Vec<CMatrix>,
    pub alpha: f64,
}

/// One received pilot block.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBlock {
    pub y: CMatrix,
    pub x_pilot: CMatrix,
    /// `Y·Xᴴ/√P_u`, i.e. `G` plus noise of variance `noise_var/P_u`.
    pub y_decorrelated: CMatrix,
}

/// Distance and resulting large-scale coefficient of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserGeometry {
    pub distance_m: f64,
    pub beta: f64,
}

pub fn doppler_shift(carrier_hz: f64, velocity_mps: f64) -> Result<f64> {
    if !(carrier_hz > 0.0) {
        return Err(invalid("carrier_hz", "must be > 0"));
    }
    if !(velocity_mps > 0.0) {
        return Err(invalid("velocity_mps", "must be > 0"));
    }
    Ok(carrier_hz * velocity_mps / SPEED_OF_LIGHT)
}

/// Jakes temporal correlation `J₀(2π f_D T_B)` between consecutive blocks.
pub fn jakes_alpha(doppler_hz: f64, block_duration_s: f64) -> Result<f64> {
    if !(doppler_hz >= 0.0) {
        return Err(invalid("doppler_hz", "must be >= 0"));
    }
    if !(block_duration_s >= 0.0) {
        return Err(invalid("block_duration_s", "must be >= 0"));
    }
    Ok(bessel_j0(
        2.0 * std::f64::consts::PI * doppler_hz * block_duration_s,
    ))
}

/// AR(1) coefficient implied by a config (explicit override wins).
pub fn config_alpha(cfg: &SystemConfig) -> Result<f64> {
    match cfg.alpha_override {
        Some(a) => Ok(a),
        None => jakes_alpha(
            doppler_shift(cfg.carrier_hz, cfg.velocity_mps)?,
            cfg.block_duration_s,
        ),
    }
}

/// `β = z / (d/d₀)^γ` with `z = 10^(σ_shadow·ξ/10)`.
pub fn large_scale_gain(distance_m: f64, shadow_normal: f64, cfg: &SystemConfig) -> f64 {
    let z = 10f64.powf(cfg.shadow_std_db * shadow_normal / 10.0);
    z / (distance_m / cfg.ref_distance_m).powf(cfg.pathloss_exp)
}

pub fn draw_user_geometry<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> UserGeometry {
    let distance_m = if cfg.max_distance_m > cfg.min_distance_m {
        rng.gen_range(cfg.min_distance_m..cfg.max_distance_m)
    } else {
        cfg.min_distance_m
    };
    let xi: f64 = rng.sample(StandardNormal);
    UserGeometry {
        distance_m,
        beta: large_scale_gain(distance_m, xi, cfg),
    }
}

pub fn draw_large_scale<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> Vec<f64> {
    (0..cfg.n_tx)
        .map(|_| draw_user_geometry(rng, cfg).beta)
        .collect()
}

/// Circular-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Stationary draw of `G₁`: entry `(r, t)` has variance `β_t`.
pub fn init_channel<R: Rng + ?Sized>(rng: &mut R, n_rx: usize, beta: &[f64]) -> CMatrix {
    // column-major fill keeps the draw order tied to (user, antenna)
    let mut g = CMatrix::zeros(n_rx, beta.len());
    for (t, &b) in beta.iter().enumerate() {
        for r in 0..n_rx {
            g[(r, t)] = complex_normal(rng, b);
        }
    }
    g
}

/// One AR(1) step `g ← α·g + √(1−α²)·γ`, innovation variance `β_t`.
pub fn evolve_channel<R: Rng + ?Sized>(
    g_prev: &CMatrix,
    alpha: f64,
    beta: &[f64],
    rng: &mut R,
) -> Result<CMatrix> {
    if !(alpha.abs() <= 1.0) {
        return Err(invalid("alpha", "must satisfy |alpha| <= 1"));
    }
    if g_prev.ncols() != beta.len() {
        return Err(Error::Dimension(format!(
            "channel has {} users, beta has {}",
            g_prev.ncols(),
            beta.len()
        )));
    }
    let s = (1.0 - alpha * alpha).max(0.0).sqrt();
    let mut g = g_prev * Complex64::from(alpha);
    if s > 0.0 {
        for (t, &b) in beta.iter().enumerate() {
            for r in 0..g.nrows() {
                g[(r, t)] += complex_normal(rng, b) * s;
            }
        }
    }
    Ok(g)
}

/// Unitary DFT matrix, entries `e^(−2πi·jk/N)/√N`.
pub fn make_pilots(n_tx: usize) -> CMatrix {
    let n = n_tx as f64;
    let scale = 1.0 / n.sqrt();
    CMatrix::from_fn(n_tx, n_tx, |j, k| {
        // reduce jk mod N before scaling to keep the phase exact for large N
        let jk = (j * k) % n_tx;
        Complex64::from_polar(scale, -2.0 * std::f64::consts::PI * jk as f64 / n)
    })
}

/// `Y = √P_u·G·X + N` together with the pilot-removed `Y·Xᴴ/√P_u`.
pub fn observe<R: Rng + ?Sized>(
    g: &CMatrix,
    pilots: &CMatrix,
    uplink_power_db: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<ObservationBlock> {
    if pilots.nrows() != g.ncols() || !pilots.is_square() {
        return Err(Error::Dimension(format!(
            "G is {}x{}, pilots are {}x{}",
            g.nrows(),
            g.ncols(),
            pilots.nrows(),
            pilots.ncols()
        )));
    }
    if !(noise_var >= 0.0) {
        return Err(invalid("noise_var", "must be >= 0"));
    }
    let sqrt_p = 10f64.powf(uplink_power_db / 20.0);
    let mut y = g * pilots * Complex64::from(sqrt_p);
    if noise_var > 0.0 {
        for v in y.iter_mut() {
            *v += complex_normal(rng, noise_var);
        }
    }
    let y_decorrelated = &y * pilots.adjoint() / Complex64::from(sqrt_p);
    Ok(ObservationBlock {
        y,
        x_pilot: pilots.clone(),
        y_decorrelated,
    })
}

impl ChannelTrajectory {
    /// Draws β, `G₁` and the remaining blocks by AR(1) evolution.
    pub fn generate<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Self> {
        let alpha = config_alpha(cfg)?;
        let beta = draw_large_scale(rng, cfg);
        let mut g_blocks = Vec::with_capacity(cfg.n_blocks);
        g_blocks.push(init_channel(rng, cfg.n_rx, &beta));
        for _ in 1..cfg.n_blocks {
            let next = evolve_channel(g_blocks.last().unwrap(), alpha, &beta, rng)?;
            g_blocks.push(next);
        }
        Ok(Self {
            beta,
            g_blocks,
            alpha,
        })
    }
}

/// Column `t` of a complex matrix in real-composite form: real parts stacked
/// over imaginary parts.
pub fn composite_column(m: &CMatrix, t: usize) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_fn(2 * n, |i, _| {
        if i < n {
            m[(i, t)].re
        } else {
            m[(i - n, t)].im
        }
    })
}

/// Index of entry `r` (0-based antenna) and `part` in a composite vector.
pub fn composite_index(n_rx: usize, r: usize, part: crate::config::Part) -> usize {
    match part {
        crate::config::Part::Real => r,
        crate::config::Part::Imag => n_rx + r,
    }
}

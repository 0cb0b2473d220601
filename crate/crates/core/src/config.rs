//! Experiment configuration and its flat `key = value` text format.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Which component of a complex coefficient the metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Real,
    Imag,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Real => "real",
            Part::Imag => "imag",
        })
    }
}

impl FromStr for Part {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "real" => Ok(Part::Real),
            "imag" => Ok(Part::Imag),
            other => Err(format!("expected `real` or `imag`, got `{other}`")),
        }
    }
}

/// How the pseudo-dynamic inner iterations of one block consume the block's
/// observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerUpdate {
    /// Every inner iteration assimilates the observation with the full noise
    /// covariance `R`.
    Repeated,
    /// Each of the `K` inner iterations assimilates the observation with
    /// covariance `K·R`, so the block's observation is counted once in total.
    Tempered,
}

impl fmt::Display for InnerUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InnerUpdate::Repeated => "repeated",
            InnerUpdate::Tempered => "tempered",
        })
    }
}

impl FromStr for InnerUpdate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "repeated" => Ok(InnerUpdate::Repeated),
            "tempered" => Ok(InnerUpdate::Tempered),
            other => Err(format!("expected `repeated` or `tempered`, got `{other}`")),
        }
    }
}

/// All physical and algorithmic parameters of one experiment.
///
/// [`Default`] gives the full-scale system (512 BS antennas, 128 users);
/// [`SystemConfig::desk`] gives the scaled-down configuration used for
/// routine runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    pub uplink_power_db: f64,
    pub noise_var: f64,
    pub carrier_hz: f64,
    pub velocity_mps: f64,
    pub block_duration_s: f64,
    /// Forces the AR(1) coefficient instead of deriving it from the Doppler
    /// shift.
    pub alpha_override: Option<f64>,
    pub shadow_std_db: f64,
    pub pathloss_exp: f64,
    pub ref_distance_m: f64,
    pub min_distance_m: f64,
    pub max_distance_m: f64,
    pub n_blocks: usize,
    pub n_inner_iters: usize,
    pub n_ensemble: usize,
    pub n_particles: usize,
    pub n_mc_runs: usize,
    pub pseudo_noise_scale: f64,
    pub anneal_factor: f64,
    pub inner_update: InnerUpdate,
    pub master_seed: u64,
    /// Tracked coefficient of the tracking study, 1-based `(antenna, user)`.
    pub track_coeff: (usize, usize),
    /// Tracked coefficient of the convergence study, 1-based `(antenna, user)`.
    pub converge_coeff: (usize, usize),
    pub part: Part,
    /// All Monte Carlo runs share the trajectory of run 0 and differ only in
    /// observation noise and filter randomness.
    pub shared_trajectory: bool,
}

pub const KMH: f64 = 1000.0 / 3600.0;

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_rx: 512,
            n_tx: 128,
            uplink_power_db: 5.0,
            noise_var: 1.0,
            carrier_hz: 2e9,
            velocity_mps: 20.0 * KMH,
            block_duration_s: 0.002,
            alpha_override: None,
            shadow_std_db: 8.0,
            pathloss_exp: 3.8,
            ref_distance_m: 100.0,
            min_distance_m: 100.0,
            max_distance_m: 1000.0,
            n_blocks: 50,
            n_inner_iters: 128,
            n_ensemble: 128,
            n_particles: 128,
            n_mc_runs: 50,
            pseudo_noise_scale: 0.01,
            anneal_factor: 0.97,
            inner_update: InnerUpdate::Tempered,
            master_seed: 0x5eed_2024,
            track_coeff: (2, 2),
            converge_coeff: (4, 1),
            part: Part::Real,
            shared_trajectory: false,
        }
    }
}

impl SystemConfig {
    /// Scaled configuration for the tracking study: 32 antennas, 8 users,
    /// 32 inner iterations per block.
    pub fn desk() -> Self {
        Self {
            n_rx: 32,
            n_tx: 8,
            n_inner_iters: 32,
            ..Self::default()
        }
    }

    /// Scaled configuration for the convergence study (128 inner iterations).
    pub fn desk_convergence() -> Self {
        Self {
            n_inner_iters: 128,
            ..Self::desk()
        }
    }

    pub fn uplink_power(&self) -> f64 {
        10f64.powf(self.uplink_power_db / 10.0)
    }

    /// Real-composite state dimension of one user's channel column.
    pub fn state_dim(&self) -> usize {
        2 * self.n_rx
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_rx", self.n_rx),
            ("n_tx", self.n_tx),
            ("n_blocks", self.n_blocks),
            ("n_inner_iters", self.n_inner_iters),
            ("n_mc_runs", self.n_mc_runs),
            ("n_particles", self.n_particles),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        if self.n_ensemble < 2 {
            return Err(invalid("n_ensemble", "must be at least 2"));
        }
        let finite = [
            ("uplink_power_db", self.uplink_power_db),
            ("shadow_std_db", self.shadow_std_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        let positive = [
            ("noise_var", self.noise_var),
            ("carrier_hz", self.carrier_hz),
            ("velocity_mps", self.velocity_mps),
            ("block_duration_s", self.block_duration_s),
            ("ref_distance_m", self.ref_distance_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.pathloss_exp >= 0.0 && self.pathloss_exp.is_finite()) {
            return Err(invalid(
                "pathloss_exp",
                format!("must be >= 0, got {}", self.pathloss_exp),
            ));
        }
        if self.shadow_std_db < 0.0 {
            return Err(invalid("shadow_std_db", "must be >= 0"));
        }
        if !(self.pseudo_noise_scale >= 0.0 && self.pseudo_noise_scale.is_finite()) {
            return Err(invalid("pseudo_noise_scale", "must be >= 0"));
        }
        if !(self.anneal_factor > 0.0 && self.anneal_factor <= 1.0) {
            return Err(invalid("anneal_factor", "must lie in (0, 1]"));
        }
        if self.min_distance_m < self.ref_distance_m {
            return Err(invalid("min_distance_m", "must be >= ref_distance_m"));
        }
        if !(self.max_distance_m >= self.min_distance_m && self.max_distance_m.is_finite()) {
            return Err(invalid("max_distance_m", "must be >= min_distance_m"));
        }
        if let Some(a) = self.alpha_override {
            if !(a.abs() <= 1.0) {
                return Err(invalid("alpha", "must satisfy |alpha| <= 1"));
            }
        }
        for (name, (r, t)) in [
            ("track_coeff", self.track_coeff),
            ("converge_coeff", self.converge_coeff),
        ] {
            if r < 1 || r > self.n_rx || t < 1 || t > self.n_tx {
                return Err(invalid(
                    name,
                    format!("({r},{t}) outside 1..={} x 1..={}", self.n_rx, self.n_tx),
                ));
            }
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("`{key}`: cannot parse `{v}`"))
        }
        fn coeff(key: &str, v: &str) -> std::result::Result<(usize, usize), String> {
            let (r, t) = v
                .split_once(',')
                .ok_or_else(|| format!("`{key}`: expected `r,t`, got `{v}`"))?;
            Ok((num(key, r.trim())?, num(key, t.trim())?))
        }
        match key {
            "n_rx" => self.n_rx = num(key, value)?,
            "n_tx" => self.n_tx = num(key, value)?,
            "uplink_power_db" => self.uplink_power_db = num(key, value)?,
            "noise_var" => self.noise_var = num(key, value)?,
            "carrier_hz" => self.carrier_hz = num(key, value)?,
            "velocity_mps" => self.velocity_mps = num(key, value)?,
            "velocity_kmh" => self.velocity_mps = num::<f64>(key, value)? * KMH,
            "block_duration_s" => self.block_duration_s = num(key, value)?,
            "alpha" => self.alpha_override = Some(num(key, value)?),
            "shadow_std_db" => self.shadow_std_db = num(key, value)?,
            "pathloss_exp" => self.pathloss_exp = num(key, value)?,
            "ref_distance_m" => self.ref_distance_m = num(key, value)?,
            "min_distance_m" => self.min_distance_m = num(key, value)?,
            "max_distance_m" => self.max_distance_m = num(key, value)?,
            "n_blocks" => self.n_blocks = num(key, value)?,
            "n_inner_iters" => self.n_inner_iters = num(key, value)?,
            "n_ensemble" => self.n_ensemble = num(key, value)?,
            "n_particles" => self.n_particles = num(key, value)?,
            "n_mc_runs" => self.n_mc_runs = num(key, value)?,
            "pseudo_noise_scale" => self.pseudo_noise_scale = num(key, value)?,
            "anneal_factor" => self.anneal_factor = num(key, value)?,
            "inner_update" => {
                self.inner_update = value.parse().map_err(|e| format!("`{key}`: {e}"))?
            }
            "master_seed" => self.master_seed = num(key, value)?,
            "track_coeff" => self.track_coeff = coeff(key, value)?,
            "converge_coeff" => self.converge_coeff = coeff(key, value)?,
            "part" => self.part = value.parse().map_err(|e| format!("`{key}`: {e}"))?,
            "shared_trajectory" => self.shared_trajectory = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Short one-line digest for summaries.
    pub fn digest(&self) -> String {
        format!(
            "n_rx={} n_tx={} P_u={}dB blocks={} inner={} ensemble={} particles={} runs={} seed={} update={}",
            self.n_rx,
            self.n_tx,
            self.uplink_power_db,
            self.n_blocks,
            self.n_inner_iters,
            self.n_ensemble,
            self.n_particles,
            self.n_mc_runs,
            self.master_seed,
            self.inner_update,
        )
    }
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return None;
    }
    Some((k, v))
}

/// Parses a flat `key = value` document (one pair per line, `#` starts a
/// comment) and then applies `overrides` in order.
///
/// Unspecified keys keep the full-scale defaults. Errors carry the 1-based
/// line number; override `i` is reported as line `i + 1` after the last file
/// line.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SystemConfig> {
    parse_config_onto(SystemConfig::default(), text, overrides)
}

/// Same as [`parse_config`] but starting from `base` instead of the defaults.
pub fn parse_config_onto(
    mut cfg: SystemConfig,
    text: &str,
    overrides: &[String],
) -> Result<SystemConfig> {
    let mut n_lines = 0;
    for (i, raw) in text.lines().enumerate() {
        n_lines = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_assignment(line).ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key = value`, got `{}`", raw.trim()),
        })?;
        cfg.set(k, v).map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
    }
    for (j, o) in overrides.iter().enumerate() {
        let line = n_lines + j + 1;
        let (k, v) = split_assignment(o).ok_or_else(|| Error::Parse {
            line,
            message: format!("override `{o}` is not `key=value`"),
        })?;
        cfg.set(k, v)
            .map_err(|message| Error::Parse { line, message })?;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Parse {
            line: locate_key(text, overrides, name).unwrap_or(0),
            message: format!("`{name}` out of range: {reason}"),
        },
        other => other,
    })?;
    Ok(cfg)
}

fn locate_key(text: &str, overrides: &[String], key: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let n = lines.len();
    let matches = |s: &str| {
        split_assignment(s.split('#').next().unwrap_or(""))
            .map(|(k, _)| k == key)
            .unwrap_or(false)
    };
    overrides
        .iter()
        .rposition(|o| matches(o))
        .map(|j| n + j + 1)
        .or_else(|| lines.iter().rposition(|l| matches(l)).map(|i| i + 1))
}

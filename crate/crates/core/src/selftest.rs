//! Quick invariant checks runnable from a release binary.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::filters::{
    ensrf_analysis, isotropic_noise, kalman_gain, puensrf_analysis, sir_step, stats_of,
    systematic_resample, ParticleCloud, Propagation,
};
use crate::model::{
    bessel_j0, evolve_channel, init_channel, make_pilots, observe, CMatrix, ChannelTrajectory,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// `J₀` by composite Simpson quadrature of `(1/π)∫₀^π cos(x sin θ) dθ`.
pub fn bessel_j0_quadrature(x: f64) -> f64 {
    let n = 2000;
    let h = std::f64::consts::PI / n as f64;
    let f = |th: f64| (x * th.sin()).cos();
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / std::f64::consts::PI
}

pub fn run_selftest() -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut out = Vec::new();

    let worst = (1..=16)
        .map(|n| {
            let x = make_pilots(n);
            (&x * x.adjoint() - CMatrix::identity(n, n))
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    out.push(check(
        "pilot unitarity",
        worst < 1e-10,
        format!("max |XXᴴ−I| = {worst:.2e}"),
    ));

    let g = init_channel(&mut rng, 8, &[1.0, 0.3, 2.0, 0.5]);
    let ob = observe(&g, &make_pilots(4), 5.0, 0.0, &mut rng)?;
    let gap = (&ob.y_decorrelated - &g)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    out.push(check(
        "decorrelation exactness",
        gap < 1e-10,
        format!("max gap {gap:.2e}"),
    ));

    let beta = 0.7;
    let mut g = init_channel(&mut rng, 1, &[beta]);
    let mut acc = 0.0;
    let steps = 100_000;
    for _ in 0..steps {
        g = evolve_channel(&g, 0.95, &[beta], &mut rng)?;
        acc += g[(0, 0)].norm_sqr();
    }
    let ratio = acc / steps as f64 / beta;
    out.push(check(
        "AR(1) stationary variance",
        (ratio - 1.0).abs() < 0.05,
        format!("var/β = {ratio:.4}"),
    ));

    let j0_err = (0..100)
        .map(|i| {
            let x = 20.0 * i as f64 / 99.0;
            (bessel_j0(x) - bessel_j0_quadrature(x)).abs()
        })
        .fold(0.0, f64::max);
    out.push(check(
        "J0 vs quadrature",
        j0_err < 1e-8,
        format!("max error {j0_err:.2e}"),
    ));

    let (mut mean_gap, mut sqrt_err, mut gain_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.gen_range(1..=16);
        let t = rng.gen_range(2..=24);
        let g = DMatrix::from_fn(n, t, |_, _| rng.gen_range(-1.0..1.0));
        let h = rng.gen_range(0.5..2.0);
        let yf = &g * h;
        let fs = stats_of(&g)?;
        let os = stats_of(&yf)?;
        let r = rng.gen_range(0.1..2.0);
        let ctx = kalman_gain(&fs.perturbations, &os.perturbations, &isotropic_noise(n, r))?;
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let (mean, members) = ensrf_analysis(&fs, &os, &ctx, &y)?;
        let pu = puensrf_analysis(&g, &yf, &ctx, &y)?;
        mean_gap = mean_gap.max((pu.column_mean() - &mean).amax());
        let a = stats_of(&members)?;
        let lhs = &a.perturbations * a.perturbations.transpose();
        let rhs =
            (&fs.perturbations - &ctx.gain * &os.perturbations) * fs.perturbations.transpose();
        sqrt_err = sqrt_err.max((&lhs - &rhs).norm() / rhs.norm().max(1e-300));
        let p = &fs.perturbations * fs.perturbations.transpose();
        let s = &p * (h * h) + DMatrix::from_diagonal_element(n, n, r);
        let k = s.cholesky().map(|c| c.solve(&(&p * h)).transpose());
        if let Some(k) = k {
            gain_err = gain_err.max((&ctx.gain - k).amax());
        }
    }
    out.push(check(
        "particle-wise mean identity",
        mean_gap < 1e-12,
        format!("max gap {mean_gap:.2e}"),
    ));
    out.push(check(
        "square-root covariance identity",
        sqrt_err < 1e-8,
        format!("max rel err {sqrt_err:.2e}"),
    ));
    out.push(check(
        "gain equivalence",
        gain_err < 1e-8,
        format!("max err {gain_err:.2e}"),
    ));

    let w = DVector::from_vec(vec![0.1, 0.45, 0.05, 0.3, 0.1]);
    let trials = 10_000;
    let mut counts = [0usize; 5];
    for _ in 0..trials {
        for i in systematic_resample(&w, &mut rng)? {
            counts[i] += 1;
        }
    }
    let mut worst_z = 0.0f64;
    for (i, &c) in counts.iter().enumerate() {
        let expect = 5.0 * w[i];
        let mean = c as f64 / trials as f64;
        // systematic replication count takes floor/ceil of n·w, variance frac(1−frac)
        let frac = expect - expect.floor();
        let se = (frac * (1.0 - frac) / trials as f64).sqrt().max(1e-12);
        worst_z = worst_z.max((mean - expect).abs() / se);
    }
    out.push(check(
        "resampling unbiasedness",
        worst_z < 3.0 || worst_z.is_nan(),
        format!("max z {worst_z:.2}"),
    ));

    let mut cloud =
        ParticleCloud::uniform(DMatrix::from_fn(4, 64, |_, _| rng.gen_range(-1.0..1.0)));
    let mut ok = true;
    for k in 0..30 {
        let y = DVector::from_fn(4, |i, _| ((i + k) as f64 * 0.3).sin());
        sir_step(
            &mut cloud,
            &y,
            Propagation::Jitter(0.01),
            0.0,
            0.2,
            &mut rng,
        )?;
        let s = cloud.weights.sum();
        ok &= (s - 1.0).abs() < 1e-10 && cloud.weights.iter().all(|&w| w >= 0.0);
        ok &= cloud.effective_sample_size >= 1.0 - 1e-9
            && cloud.effective_sample_size <= cloud.len() as f64 + 1e-9;
    }
    out.push(check("SIR weights and ESS bounds", ok, String::new()));

    let mut cfg = SystemConfig::desk();
    cfg.n_blocks = 4;
    let a = ChannelTrajectory::generate(&cfg, &mut ChaCha8Rng::seed_from_u64(9))?;
    let b = ChannelTrajectory::generate(&cfg, &mut ChaCha8Rng::seed_from_u64(9))?;
    out.push(check("seeded determinism", a == b, String::new()));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for c in run_selftest().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

//! Acceptance suite: every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mimo_ensrf::experiments::{
    run_convergence_experiment, run_oracle_comparison, run_tracking_experiment, Algorithm,
    MetricsSeries,
};
use mimo_ensrf::filters::{
    ensemble_stats, ensrf_analysis, forecast_observations, isotropic_noise, kalman_gain,
    ls_estimate, pseudo_forecast, puensrf_analysis, Ensemble, EnsembleStats,
};
use mimo_ensrf::model::{
    config_alpha, doppler_shift, evolve_channel, init_channel, jakes_alpha, make_pilots, observe,
};
use mimo_ensrf::SystemConfig;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Random forecast members, a random linear observation operator applied to
/// them, and a measurement, for dimensions up to 64 × 32.
struct RandomCase {
    forecast: DMatrix<f64>,
    observed: DMatrix<f64>,
    noise: DVector<f64>,
    measurement: DVector<f64>,
}

fn random_case(rng: &mut ChaCha8Rng) -> RandomCase {
    let n = rng.gen_range(1..=64);
    let t = rng.gen_range(2..=32);
    let m = rng.gen_range(1..=64);
    let forecast = DMatrix::from_fn(n, t, |_, _| rng.gen_range(-2.0..2.0));
    let h = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    RandomCase {
        observed: &h * &forecast,
        forecast,
        noise: DVector::from_fn(m, |_, _| rng.gen_range(0.05..3.0)),
        measurement: DVector::from_fn(m, |_, _| rng.gen_range(-3.0..3.0)),
    }
}

fn stats(m: &DMatrix<f64>) -> EnsembleStats {
    ensemble_stats(&Ensemble::new(m.clone(), 0, 0).expect("ensemble")).expect("stats")
}

fn c1_mean_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = random_case(&mut rng);
        let (fs, os) = (stats(&c.forecast), stats(&c.observed));
        let gain = kalman_gain(&fs.perturbations, &os.perturbations, &c.noise).expect("gain");
        let (mean, _) = ensrf_analysis(&fs, &os, &gain, &c.measurement).expect("ensrf");
        let pu = puensrf_analysis(&c.forecast, &c.observed, &gain, &c.measurement).expect("pu");
        worst = worst.max((pu.column_mean() - mean).amax());
    }
    outcome(
        worst <= 1e-12,
        format!("max |mean gap| {worst:.2e} (limit 1e-12)"),
    )
}

fn c2_square_root_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = random_case(&mut rng);
        let (fs, os) = (stats(&c.forecast), stats(&c.observed));
        let gain = kalman_gain(&fs.perturbations, &os.perturbations, &c.noise).expect("gain");
        let (_, members) = ensrf_analysis(&fs, &os, &gain, &c.measurement).expect("ensrf");
        let a = stats(&members);
        let lhs = &a.perturbations * a.perturbations.transpose();
        let rhs =
            (&fs.perturbations - &gain.gain * &os.perturbations) * fs.perturbations.transpose();
        worst = worst.max((&lhs - &rhs).norm() / rhs.norm());
    }
    outcome(
        worst <= 1e-8,
        format!("max relative Frobenius error {worst:.2e} (limit 1e-8)"),
    )
}

fn c3_oracle_equivalence() -> Outcome {
    // two antennas, one user: a four-dimensional real state
    let mut cfg = SystemConfig::default();
    cfg.n_rx = 2;
    cfg.n_tx = 1;
    cfg.shadow_std_db = 0.0;
    cfg.min_distance_m = cfg.ref_distance_m;
    cfg.max_distance_m = cfg.ref_distance_m;
    cfg.alpha_override = Some(0.95);
    cfg.noise_var = 1.0;
    cfg.n_blocks = 50;
    cfg.n_inner_iters = 1;
    cfg.pseudo_noise_scale = 0.0;
    cfg.n_ensemble = 2000;
    cfg.n_particles = 10_000;
    cfg.n_mc_runs = 20;
    cfg.track_coeff = (1, 1);
    cfg.converge_coeff = (1, 1);
    let r = run_oracle_comparison(&cfg).expect("oracle comparison");
    let ensrf = r.get(Algorithm::Ensrf).expect("ensrf").overall;
    let sir = r.get(Algorithm::Sir).expect("sir").overall;
    outcome(
        ensrf <= 0.05 && sir <= 0.10,
        format!(
            "EnSRF {:.2}% (limit 5%), SIR {:.2}% (limit 10%) of oracle std",
            100.0 * ensrf,
            100.0 * sir
        ),
    )
}

fn find(series: &[MetricsSeries], a: Algorithm) -> &MetricsSeries {
    series.iter().find(|s| s.algorithm == a).expect("series")
}

fn c4_ordering() -> Outcome {
    let cfg = SystemConfig::desk();
    let r = run_tracking_experiment(&cfg).expect("tracking");
    let [pu, en, sir] =
        [Algorithm::Puensrf, Algorithm::Ensrf, Algorithm::Sir].map(|a| find(&r.tracking, a));
    let rmse = (pu.mean_rmse(), en.mean_rmse(), sir.mean_rmse());
    let var = (
        pu.mean_sample_variance(),
        en.mean_sample_variance(),
        sir.mean_sample_variance(),
    );
    outcome(
        rmse.0 <= rmse.1 && rmse.1 <= rmse.2 && var.0 <= var.1 && var.1 <= var.2,
        format!(
            "RMSE pu/en/sir {:.4}/{:.4}/{:.4}, variance {:.5}/{:.5}/{:.5}",
            rmse.0, rmse.1, rmse.2, var.0, var.1, var.2
        ),
    )
}

const SMOOTHING_WINDOW: usize = 5;

/// Trailing moving average over up to `SMOOTHING_WINDOW` points.
fn smooth(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(SMOOTHING_WINDOW - 1);
            v[lo..=i].iter().sum::<f64>() / (i - lo + 1) as f64
        })
        .collect()
}

/// First iteration (1-based) whose smoothed RMSE is below 1.5× the smoothed
/// value at the last iteration.
fn settling_index(rmse: &[f64]) -> usize {
    let s = smooth(rmse);
    let threshold = 1.5 * s[s.len() - 1];
    s.iter()
        .position(|&v| v < threshold)
        .map_or(s.len(), |i| i + 1)
}

fn c5_convergence() -> Outcome {
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 1..=10u64 {
        let mut cfg = SystemConfig::desk_convergence();
        cfg.master_seed = 1000 * seed;
        let r = run_convergence_experiment(&cfg).expect("convergence");
        let [pu, en, sir] = [Algorithm::Puensrf, Algorithm::Ensrf, Algorithm::Sir]
            .map(|a| settling_index(&find(&r.series, a).rmse));
        wins += usize::from(pu <= en && pu <= sir);
        rows.push(format!("{pu}/{en}/{sir}"));
    }
    outcome(
        wins * 2 > 10,
        format!(
            "PUEnSRF fastest in {wins}/10 seeds; settling pu/en/sir {}",
            rows.join(" ")
        ),
    )
}

fn c6_parameters() -> Outcome {
    let cfg = SystemConfig::default();
    let fd = doppler_shift(cfg.carrier_hz, cfg.velocity_mps).expect("doppler");
    let alpha = jakes_alpha(fd, cfg.block_duration_s).expect("alpha");
    let via_cfg = config_alpha(&cfg).expect("config alpha");
    outcome(
        (fd - 37.0).abs() < 0.5 && (alpha - 0.95).abs() < 0.005 && via_cfg == alpha,
        format!("doppler {fd:.4} Hz, alpha {alpha:.6}"),
    )
}

fn c7_model_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let beta = 0.8;
    let n_rx = 64;
    let steps = 100_000;
    let mut g = init_channel(&mut rng, n_rx, &[beta]);
    let mut acc = 0.0;
    for _ in 0..steps {
        g = evolve_channel(&g, 0.95, &[beta], &mut rng).expect("evolve");
        acc += g.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    let ar_ratio = acc / (steps * n_rx) as f64 / beta;

    let cfg = SystemConfig::desk();
    let pilots = make_pilots(cfg.n_tx);
    let g = init_channel(&mut rng, cfg.n_rx, &vec![1.0; cfg.n_tx]);
    let trials = 10_000;
    let mut err = 0.0;
    for _ in 0..trials {
        let ob =
            observe(&g, &pilots, cfg.uplink_power_db, cfg.noise_var, &mut rng).expect("observe");
        err += (ls_estimate(&ob) - &g)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>();
    }
    let ls_ratio =
        err / (trials * cfg.n_rx * cfg.n_tx) as f64 / (cfg.noise_var / cfg.uplink_power());
    outcome(
        (ar_ratio - 1.0).abs() < 0.05 && (ls_ratio - 1.0).abs() < 0.05,
        format!("AR(1) var/β {ar_ratio:.4}, LS error var/(σ²/P_u) {ls_ratio:.4}"),
    )
}

fn track_into(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_mimo-ensrf"))
        .args(["track", "--seed", "4242", "--out"])
        .arg(dir)
        .args([
            "--set",
            "n_mc_runs=6",
            "--set",
            "n_blocks=6",
            "--set",
            "n_inner_iters=8",
        ])
        .env_remove(mimo_ensrf_cli::SEED_ENV)
        .output()
        .expect("spawn cli");
    assert!(
        status.status.success(),
        "track failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    ["tracking.csv", "convergence.csv", "trace.csv"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).expect("csv")))
        .collect()
}

fn c8_determinism() -> Outcome {
    let base = std::env::temp_dir().join(format!("mimo-ensrf-accept-{}", std::process::id()));
    let a = track_into(&base.join("a"));
    let b = track_into(&base.join("b"));
    let _ = std::fs::remove_dir_all(&base);
    let same = a == b && a.iter().all(|(_, bytes)| !bytes.is_empty());
    outcome(
        same,
        format!("{} CSV files compared byte for byte", a.len()),
    )
}

fn c9_full_scale() -> Outcome {
    let cfg = SystemConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let dim = 2 * cfg.n_rx;
    let beta = 0.5;
    let started = Instant::now();
    let mut ens =
        Ensemble::from_prior(dim, cfg.n_ensemble, beta / 2.0, 0, &mut rng).expect("prior");
    let y = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    pseudo_forecast(&mut ens, cfg.pseudo_noise_scale * beta, &mut rng).expect("forecast");
    let fs = ensemble_stats(&ens).expect("stats");
    let obs = forecast_observations(&ens, cfg.uplink_power_db).expect("observations");
    let gain = kalman_gain(
        &fs.perturbations,
        &obs.stats.perturbations,
        &isotropic_noise(dim, cfg.noise_var / 2.0),
    )
    .expect("gain");
    let (mean, members) = ensrf_analysis(&fs, &obs.stats, &gain, &y).expect("analysis");
    let elapsed = started.elapsed();
    let finite = mean.iter().chain(members.iter()).all(|v| v.is_finite());
    outcome(
        finite && elapsed < Duration::from_secs(10),
        format!(
            "n_rx {} × ensemble {} cycle in {:.3} s (limit 10 s)",
            cfg.n_rx,
            cfg.n_ensemble,
            elapsed.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "C1 particle-wise mean identity",
            Duration::from_secs(5),
            c1_mean_identity,
        ),
        (
            "C2 square-root covariance identity",
            Duration::from_secs(10),
            c2_square_root_identity,
        ),
        (
            "C3 oracle equivalence",
            Duration::from_secs(120),
            c3_oracle_equivalence,
        ),
        (
            "C4 tracking accuracy ordering",
            Duration::from_secs(300),
            c4_ordering,
        ),
        (
            "C5 convergence speed",
            Duration::from_secs(180),
            c5_convergence,
        ),
        (
            "C6 mobility parameters",
            Duration::from_secs(5),
            c6_parameters,
        ),
        (
            "C7 model statistics",
            Duration::from_secs(120),
            c7_model_statistics,
        ),
        (
            "C8 seeded determinism",
            Duration::from_secs(120),
            c8_determinism,
        ),
        (
            "C9 full-scale feasibility",
            Duration::from_secs(10),
            c9_full_scale,
        ),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let started = Instant::now();
        let o = f();
        let elapsed = started.elapsed();
        let passed = o.passed && elapsed <= budget;
        failed += usize::from(!passed);
        println!(
            "{} {name}: {} [{:.1} s of {} s]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

use mimo_ensrf::filters::ls_estimate;
use mimo_ensrf::model::{
    composite_column, config_alpha, doppler_shift, evolve_channel, init_channel, jakes_alpha,
    make_pilots, observe, ChannelTrajectory,
};
use mimo_ensrf::SystemConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided Kolmogorov–Smirnov statistic against a continuous CDF.
fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn initial_channel_components_are_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let beta = 0.4;
    let g = init_channel(&mut rng, 20_000, &[beta]);
    let normal = Normal::new(0.0, (beta / 2.0).sqrt()).unwrap();
    for xs in [
        g.iter().map(|c| c.re).collect::<Vec<_>>(),
        g.iter().map(|c| c.im).collect(),
    ] {
        let d = ks_statistic(xs, |x| normal.cdf(x));
        // 1% critical value ≈ 1.63/√n
        assert!(d < 1.63 / (20_000f64).sqrt(), "KS statistic {d}");
    }
}

#[test]
fn ar1_innovations_keep_marginal_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let beta = 1.3;
    let mut g = init_channel(&mut rng, 5_000, &[beta]);
    for _ in 0..20 {
        g = evolve_channel(&g, 0.95, &[beta], &mut rng).unwrap();
    }
    let normal = Normal::new(0.0, (beta / 2.0).sqrt()).unwrap();
    let d = ks_statistic(g.iter().map(|c| c.re).collect(), |x| normal.cdf(x));
    assert!(d < 1.63 / (5_000f64).sqrt(), "KS statistic {d}");
}

#[test]
fn ls_error_is_gaussian_with_noise_over_power_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SystemConfig::desk();
    let pilots = make_pilots(4);
    let g = init_channel(&mut rng, 8, &[1.0, 0.5, 0.2, 0.1]);
    let mut errs = Vec::new();
    for _ in 0..500 {
        let ob = observe(&g, &pilots, cfg.uplink_power_db, cfg.noise_var, &mut rng).unwrap();
        errs.extend((ls_estimate(&ob) - &g).iter().map(|c| c.re));
    }
    let sd = (cfg.noise_var / (2.0 * cfg.uplink_power())).sqrt();
    let normal = Normal::new(0.0, sd).unwrap();
    let d = ks_statistic(errs.clone(), |x| normal.cdf(x));
    assert!(d < 1.63 / (errs.len() as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn composite_column_stacks_real_over_imaginary() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = init_channel(&mut rng, 3, &[1.0, 1.0]);
    let v = composite_column(&g, 1);
    assert_eq!(v.len(), 6);
    for r in 0..3 {
        assert_eq!(v[r], g[(r, 1)].re);
        assert_eq!(v[3 + r], g[(r, 1)].im);
    }
}

#[test]
fn default_mobility_gives_expected_correlation() {
    let cfg = SystemConfig::default();
    let fd = doppler_shift(cfg.carrier_hz, cfg.velocity_mps).unwrap();
    assert!((fd - 37.0).abs() < 0.5, "doppler {fd}");
    let a = jakes_alpha(fd, cfg.block_duration_s).unwrap();
    assert!((a - 0.95).abs() < 0.005, "alpha {a}");
    assert_eq!(config_alpha(&cfg).unwrap(), a);
}

#[test]
fn trajectory_shapes_and_seeding() {
    let mut cfg = SystemConfig::desk();
    cfg.n_blocks = 3;
    let a = ChannelTrajectory::generate(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let b = ChannelTrajectory::generate(&cfg, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert_eq!(a.g_blocks.len(), 3);
    assert_eq!(a.beta.len(), cfg.n_tx);
    assert_eq!(a.g_blocks[0].shape(), (cfg.n_rx, cfg.n_tx));
    assert_ne!(a, b);
}

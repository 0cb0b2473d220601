//! Command-line front end: argument parsing, config resolution, summaries
//! and exit codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mimo_ensrf::experiments::{
    run_convergence_experiment, run_oracle_comparison, run_tracking_experiment, MetricsSeries,
};
use mimo_ensrf::report::{emit_csv, MetricsSet};
use mimo_ensrf::selftest::run_selftest;
use mimo_ensrf::{parse_config_onto, Error, SystemConfig};

/// Environment variable consulted for the master seed when neither the
/// config file nor the command line sets one.
pub const SEED_ENV: &str = "MIMO_ENSRF_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tracking study over all blocks; writes tracking.csv, convergence.csv
    /// (inner iterations of block 1) and trace.csv.
    Track,
    /// Convergence study over the inner iterations of block 1; writes
    /// convergence.csv.
    Converge,
    /// Compares every filter against the exact Kalman posterior.
    Oracle,
    /// Runs the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Eq, Parser)]
#[command(
    name = "mimo-ensrf",
    version,
    about = "Massive-MIMO channel tracking with ensemble and particle filters"
)]
pub struct Invocation {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` config file. Unset keys take full-scale defaults;
    /// without a file the desk-scale preset is used.
    #[arg(long, value_name = "PATH", global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, value_name = "DIR", default_value = "out", global = true)]
    pub out: PathBuf,
    /// Master seed; overrides the config file and the environment.
    #[arg(long, value_name = "N", global = true)]
    pub seed: Option<u64>,
    /// Config override `key=value`, applied last. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

/// Resolves the effective configuration. Precedence, lowest first: preset
/// or defaults, seed environment variable, config file, `--seed`, `--set`.
pub fn resolve_config(inv: &Invocation, env_seed: Option<&str>) -> Result<SystemConfig, String> {
    let (mut base, text) = match &inv.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
            (SystemConfig::default(), text)
        }
        None => {
            let preset = match inv.command {
                Command::Converge => SystemConfig::desk_convergence(),
                _ => SystemConfig::desk(),
            };
            (preset, String::new())
        }
    };
    if let Some(s) = env_seed {
        base.master_seed = s
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}: cannot parse `{s}` as a seed"))?;
    }
    let mut overrides = Vec::with_capacity(inv.overrides.len() + 1);
    if let Some(seed) = inv.seed {
        overrides.push(format!("master_seed={seed}"));
    }
    overrides.extend(inv.overrides.iter().cloned());
    parse_config_onto(base, &text, &overrides).map_err(|e| match e {
        Error::Parse { line, message } if line > text.lines().count() => {
            format!("override: {message}")
        }
        Error::Parse { line, message } => format!("config line {line}: {message}"),
        other => other.to_string(),
    })
}

/// Runs one invocation, printing the summary to standard output and
/// diagnostics to standard error, and returns the process exit code.
pub fn run(inv: &Invocation) -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    if inv.command == Command::Selftest {
        return selftest();
    }
    let cfg = match resolve_config(inv, env_seed.as_deref()) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_CONFIG;
        }
    };
    match execute(inv, &cfg) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn selftest() -> i32 {
    match run_selftest() {
        Ok(checks) => {
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                println!("{tag} {:<32} {}", c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            println!("{} checks, {failed} failed", checks.len());
            if failed == 0 {
                EXIT_OK
            } else {
                EXIT_SELFTEST
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SELFTEST
        }
    }
}

fn execute(inv: &Invocation, cfg: &SystemConfig) -> mimo_ensrf::Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "config: {}", cfg.digest());
    match inv.command {
        Command::Track => {
            let r = run_tracking_experiment(cfg)?;
            let (r_, t) = cfg.track_coeff;
            let _ = writeln!(
                out,
                "tracking g[{r_},{t}] ({}) over {} blocks, {} runs",
                cfg.part, cfg.n_blocks, cfg.n_mc_runs
            );
            summarize(&mut out, &r.tracking);
            let set = MetricsSet {
                tracking: r.tracking,
                convergence: r.convergence,
                trace: Some(r.trace),
            };
            list_written(&mut out, &emit_csv(&set, &inv.out)?);
        }
        Command::Converge => {
            let r = run_convergence_experiment(cfg)?;
            let (r_, t) = cfg.converge_coeff;
            let _ = writeln!(
                out,
                "convergence g[{r_},{t}] ({}) over {} iterations, {} runs; run-0 truth {:.6}",
                cfg.part, cfg.n_inner_iters, cfg.n_mc_runs, r.truth_run0
            );
            summarize(&mut out, &r.series);
            let set = MetricsSet {
                convergence: r.series,
                ..MetricsSet::default()
            };
            list_written(&mut out, &emit_csv(&set, &inv.out)?);
        }
        Command::Oracle => {
            let r = run_oracle_comparison(cfg)?;
            let _ = writeln!(
                out,
                "deviation from the Kalman posterior mean, in posterior std ({} runs):",
                r.n_runs
            );
            for d in &r.deviations {
                let spread =
                    d.spread_ratio.iter().sum::<f64>() / d.spread_ratio.len().max(1) as f64;
                let _ = writeln!(
                    out,
                    "  {:<8} {:>10.4}   spread ratio {:>7.3}",
                    d.algorithm.label(),
                    d.overall,
                    spread
                );
            }
            let _ = writeln!(
                out,
                "shared-forecast mean gap {:.3e}",
                r.shared_forecast_gap
            );
            let _ = writeln!(out, "LS error rms {:.4}", r.ls_error_rms);
        }
        Command::Selftest => unreachable!("handled before config resolution"),
    }
    Ok(out)
}

fn summarize(out: &mut String, series: &[MetricsSeries]) {
    let _ = writeln!(
        out,
        "  {:<8} {:>12} {:>16}",
        "filter", "mean rmse", "mean variance"
    );
    for s in series {
        let _ = writeln!(
            out,
            "  {:<8} {:>12.6} {:>16.6}",
            s.algorithm.label(),
            s.mean_rmse(),
            s.mean_sample_variance()
        );
    }
}

fn list_written(out: &mut String, paths: &[impl AsRef<Path>]) {
    for p in paths {
        let _ = writeln!(out, "wrote {}", p.as_ref().display());
    }
}

use std::path::PathBuf;
use std::process::{Command, Output};

use clap::Parser;
use mimo_ensrf_cli::{resolve_config, Command as Sub, Invocation, SEED_ENV};

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mimo-ensrf-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-ensrf"))
        .args(args)
        .env_remove(SEED_ENV)
        .output()
        .expect("spawn cli")
}

const SMALL: [&str; 8] = [
    "--set",
    "n_mc_runs=3",
    "--set",
    "n_blocks=3",
    "--set",
    "n_inner_iters=4",
    "--set",
    "n_ensemble=16",
];

#[test]
fn track_writes_three_csvs() {
    let dir = scratch_dir("track");
    let mut args = vec!["track", "--out", dir.to_str().unwrap()];
    args.extend(SMALL);
    let out = cli(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["tracking.csv", "convergence.csv", "trace.csv"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("config: n_rx=32"));
    assert!(stdout.contains("puensrf"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn converge_writes_convergence_only() {
    let dir = scratch_dir("converge");
    let mut args = vec!["converge", "--out", dir.to_str().unwrap()];
    args.extend(SMALL);
    let out = cli(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("convergence.csv").is_file());
    assert!(!dir.join("tracking.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("run-0 truth"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_prints_report() {
    let mut args = vec!["oracle"];
    args.extend(SMALL);
    let out = cli(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("shared-forecast mean gap"));
}

#[test]
fn bad_config_path_exits_one() {
    let out = cli(&["track", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn invalid_values_exit_one() {
    assert_eq!(
        cli(&["track", "--set", "n_ensemble=1"]).status.code(),
        Some(1)
    );
    assert_eq!(cli(&["track", "--set", "bogus=3"]).status.code(), Some(1));
    assert_eq!(cli(&["track", "--set", "n_rx"]).status.code(), Some(1));
}

#[test]
fn config_file_errors_name_the_line() {
    let dir = scratch_dir("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.cfg");
    std::fs::write(&path, "# comment\nn_rx = 8\nn_tx = eight\n").unwrap();
    let out = cli(&["track", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_passes() {
    let out = cli(&["selftest"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}

#[test]
fn seed_precedence() {
    let dir = scratch_dir("seed");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("seed.cfg");
    std::fs::write(&path, "master_seed = 7\nn_rx = 4\nn_tx = 2\n").unwrap();
    let p = path.to_str().unwrap();

    let inv = Invocation::parse_from(["mimo-ensrf", "track"]);
    assert_eq!(resolve_config(&inv, Some("99")).unwrap().master_seed, 99);

    let inv = Invocation::parse_from(["mimo-ensrf", "track", "--config", p]);
    let cfg = resolve_config(&inv, Some("99")).unwrap();
    assert_eq!((cfg.master_seed, cfg.n_rx, cfg.n_inner_iters), (7, 4, 128));

    let inv = Invocation::parse_from(["mimo-ensrf", "track", "--config", p, "--seed", "5"]);
    assert_eq!(resolve_config(&inv, Some("99")).unwrap().master_seed, 5);

    let inv = Invocation::parse_from([
        "mimo-ensrf",
        "track",
        "--seed",
        "5",
        "--set",
        "master_seed=6",
    ]);
    assert_eq!(resolve_config(&inv, None).unwrap().master_seed, 6);

    assert!(resolve_config(&Invocation::parse_from(["mimo-ensrf", "track"]), Some("x")).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn presets_depend_on_subcommand() {
    let track = Invocation::parse_from(["mimo-ensrf", "track"]);
    let conv = Invocation::parse_from(["mimo-ensrf", "converge"]);
    assert_eq!(track.command, Sub::Track);
    assert_eq!(resolve_config(&track, None).unwrap().n_inner_iters, 32);
    assert_eq!(resolve_config(&conv, None).unwrap().n_inner_iters, 128);
}

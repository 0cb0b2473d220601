//! CSV output of metric series and traces.
//!
//! Files are plain ASCII, comma separated, `\n` line endings with a final
//! newline. Numbers use decimal notation with 9 significant digits (zero is
//! written as `0.000000000`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{invalid, Error, Result};
use crate::experiments::{Algorithm, Axis, MetricsSeries, Trace};

pub const TRACKING_FILE: &str = "tracking.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const TRACE_FILE: &str = "trace.csv";

const SIG_DIGITS: i32 = 9;

/// Metric series and trace bundled for output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsSet {
    pub tracking: Vec<MetricsSeries>,
    pub convergence: Vec<MetricsSeries>,
    pub trace: Option<Trace>,
}

impl MetricsSet {
    pub fn is_empty(&self) -> bool {
        self.tracking.is_empty() && self.convergence.is_empty() && self.trace.is_none()
    }
}

pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return format!("{:.*}", SIG_DIGITS as usize, 0.0);
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS - 1 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit (9.99…→10.0…)
    let digits = s.trim_start_matches('-').replace('.', "");
    let significant = digits.trim_start_matches('0').len() as i32;
    if significant > SIG_DIGITS && decimals > 0 {
        format!("{v:.*}", decimals - 1)
    } else {
        s
    }
}

/// CSV body for a set of series sharing one axis.
pub fn metrics_csv(series: &[MetricsSeries], axis: Axis) -> Result<String> {
    let mut rows: Vec<(Algorithm, usize, f64, f64)> = Vec::new();
    for s in series {
        if s.axis != axis {
            return Err(Error::Dimension(format!(
                "{} series has axis {}, expected {}",
                s.algorithm,
                s.axis.label(),
                axis.label()
            )));
        }
        if s.index.len() != s.rmse.len() || s.rmse.len() != s.sample_variance.len() {
            return Err(Error::Dimension(format!(
                "{} series arrays differ in length",
                s.algorithm
            )));
        }
        for i in 0..s.index.len() {
            rows.push((s.algorithm, s.index[i], s.rmse[i], s.sample_variance[i]));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = format!("algorithm,{},rmse,sample_variance\n", axis.label());
    for (a, i, r, v) in rows {
        let _ = writeln!(out, "{a},{i},{},{}", format_value(r), format_value(v));
    }
    Ok(out)
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("block,truth_real,est_sir,est_ensrf,est_puensrf\n");
    for b in 0..trace.truth.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            b + 1,
            format_value(trace.truth[b]),
            format_value(trace.sir[b]),
            format_value(trace.ensrf[b]),
            format_value(trace.puensrf[b]),
        );
    }
    out
}

/// Writes every non-empty part of `set` into `output_dir` and returns the
/// written paths.
pub fn emit_csv(set: &MetricsSet, output_dir: &Path) -> Result<Vec<PathBuf>> {
    if set.is_empty() {
        return Err(invalid("metrics", "nothing to write"));
    }
    fs::create_dir_all(output_dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let path = output_dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    if !set.tracking.is_empty() {
        put(TRACKING_FILE, metrics_csv(&set.tracking, Axis::Block)?)?;
    }
    if !set.convergence.is_empty() {
        put(
            CONVERGENCE_FILE,
            metrics_csv(&set.convergence, Axis::Iteration)?,
        )?;
    }
    if let Some(trace) = &set.trace {
        put(TRACE_FILE, trace_csv(trace))?;
    }
    Ok(written)
}

/// One parsed metrics row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub algorithm: Algorithm,
    pub index: usize,
    pub rmse: f64,
    pub sample_variance: f64,
}

/// Reads back a file written by [`metrics_csv`].
pub fn parse_metrics_csv(text: &str) -> Result<(Axis, Vec<MetricsRow>)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let axis = match header {
        "algorithm,block,rmse,sample_variance" => Axis::Block,
        "algorithm,iteration,rmse,sample_variance" => Axis::Iteration,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header `{other}`"),
            })
        }
    };
    let bad = |line: usize, what: &str| Error::Parse {
        line,
        message: format!("bad {what}"),
    };
    let rows = lines
        .enumerate()
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(bad(line, "field count"));
            }
            Ok(MetricsRow {
                algorithm: Algorithm::from_label(f[0]).ok_or_else(|| bad(line, "algorithm"))?,
                index: f[1].parse().map_err(|_| bad(line, "index"))?,
                rmse: f[2].parse().map_err(|_| bad(line, "rmse"))?,
                sample_variance: f[3].parse().map_err(|_| bad(line, "sample_variance"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((axis, rows))
}

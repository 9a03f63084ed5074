//! `compare`: metrics of several runs side by side, with deltas against the
//! first run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{input, CliError, Result};
use crate::io::{self, ESTIMATE_COLUMNS};

/// Metrics reported in degrees in the human-readable table.
fn is_angle(metric: &str) -> bool {
    metric.starts_with("attitude_") && !metric.ends_with("_time")
}

struct RunSummary {
    dir: PathBuf,
    times: Vec<f64>,
    metrics: Vec<(String, f64)>,
}

fn load(dir: &Path) -> Result<RunSummary> {
    let rows = io::read_table(&io::in_dir(dir, io::ESTIMATE_FILE), &ESTIMATE_COLUMNS)?;
    let metrics = io::read_metrics(&io::in_dir(dir, io::METRICS_FILE))?;
    Ok(RunSummary { dir: dir.to_path_buf(), times: rows.iter().map(|r| r[0]).collect(), metrics })
}

fn check_aligned(a: &RunSummary, b: &RunSummary) -> Result<()> {
    let same = a.times.len() == b.times.len()
        && a.times.iter().zip(&b.times).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0));
    if !same {
        return Err(input(format!("{} and {} have different time bases", a.dir.display(), b.dir.display())));
    }
    let names = |r: &RunSummary| r.metrics.iter().map(|m| m.0.clone()).collect::<Vec<_>>();
    if names(a) != names(b) {
        return Err(input(format!("{} and {} report different metrics", a.dir.display(), b.dir.display())));
    }
    Ok(())
}

/// Returns the table printed to stdout.
pub fn cmd_compare(dirs: &[PathBuf], out: &Path) -> Result<String> {
    if dirs.len() < 2 {
        return Err(input("compare needs at least two run directories"));
    }
    let runs = dirs.iter().map(|d| load(d)).collect::<Result<Vec<_>>>()?;
    for r in &runs[1..] {
        check_aligned(&runs[0], r)?;
    }

    let mut w = csv::Writer::from_path(out).map_err(|source| CliError::Csv { path: out.to_path_buf(), source })?;
    let csv_err = |source| CliError::Csv { path: out.to_path_buf(), source };
    w.write_record(["metric", "run", "value", "delta"]).map_err(csv_err)?;
    let mut table = String::new();
    let _ = write!(table, "{:<28}", "metric");
    for r in &runs {
        let _ = write!(table, " {:>24}", r.dir.display().to_string());
    }
    table.push('\n');
    for (i, (name, base)) in runs[0].metrics.iter().enumerate() {
        let scale = if is_angle(name) { 180.0 / std::f64::consts::PI } else { 1.0 };
        let label = if is_angle(name) { format!("{name} [deg]") } else { name.clone() };
        let _ = write!(table, "{label:<28}");
        for (j, r) in runs.iter().enumerate() {
            let v = r.metrics[i].1;
            let delta = v - base;
            w.write_record([name.clone(), r.dir.display().to_string(), v.to_string(), delta.to_string()]).map_err(csv_err)?;
            let cell = if j == 0 { format!("{:.6}", v * scale) } else { format!("{:.6} ({:+.2e})", v * scale, delta * scale) };
            let _ = write!(table, " {cell:>24}");
        }
        table.push('\n');
    }
    w.flush().map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    Ok(table)
}

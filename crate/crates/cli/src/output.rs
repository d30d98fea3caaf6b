//! File writers. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use aerosurvey::harness::AggregateRow;
use aerosurvey::{GridSpec, Measurement, MetricsRow};
use serde::{Deserialize, Serialize};

pub const METRICS_HEADER: &str =
    "run,t,meters,total_unc_power,total_unc_service,service_error_rate";

pub const AGGREGATE_HEADER: &str =
    "t,mean_meters,std_meters,mean_total_unc_power,std_total_unc_power,\
mean_total_unc_service,std_total_unc_service,mean_service_error_rate,std_service_error_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    Csv,
    Pgm,
}

impl GridFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            GridFormat::Csv => "csv",
            GridFormat::Pgm => "pgm",
        }
    }
}

/// Replaces `path` with `contents` in one rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Formats like C's `%.6g`.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // Let the scientific formatter do the rounding, then read off the exponent.
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn grid_csv(values: &[f64], grid: &GridSpec, units: &str) -> String {
    let mut out = format!("# units: {units}\n");
    for row in values.chunks(grid.cols) {
        let line: Vec<String> = row.iter().map(|&v| format_sig6(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Plain PGM scaled linearly from `[min, max]` to `[0, 255]`.
pub fn grid_pgm(values: &[f64], grid: &GridSpec) -> String {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mut out = format!("P2\n{} {}\n255\n", grid.cols, grid.rows);
    for row in values.chunks(grid.cols) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                let level = if hi > lo {
                    ((v - lo) / (hi - lo) * 255.0).round()
                } else {
                    0.0
                };
                (level as u8).to_string()
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_grid(
    values: &[f64],
    grid: &GridSpec,
    path: &Path,
    format: GridFormat,
    units: &str,
) -> std::io::Result<()> {
    if values.len() != grid.len() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!(
                "grid has {} points, got {} values",
                grid.len(),
                values.len()
            ),
        ));
    }
    let text = match format {
        GridFormat::Csv => grid_csv(values, grid, units),
        GridFormat::Pgm => grid_pgm(values, grid),
    };
    write_atomic(path, text.as_bytes())
}

/// Reads a grid CSV back, skipping `#` comment lines.
pub fn read_grid_csv(text: &str) -> Result<Vec<Vec<f64>>, std::num::ParseFloatError> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split(',').map(str::parse).collect())
        .collect()
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.run, r.t, r.meters, r.total_unc_power, r.total_unc_service, r.service_error_rate
        );
    }
    out
}

pub fn trajectory_csv(measurements: &[Measurement]) -> String {
    let mut out = String::from("t,x,y\n");
    for (t, m) in measurements.iter().enumerate() {
        let _ = writeln!(out, "{t},{},{}", m.position.x, m.position.y);
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.mean_meters,
            r.std_meters,
            r.mean_total_unc_power,
            r.std_total_unc_power,
            r.mean_total_unc_service,
            r.std_total_unc_service,
            r.mean_service_error_rate,
            r.std_service_error_rate
        );
    }
    out
}

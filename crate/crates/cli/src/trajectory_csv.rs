//! Trajectory CSV.
//!
//! ```text
//! # format_version=1
//! t,tr,lambda_min,purity,re_0_0,im_0_0,re_0_1,im_0_1,...
//! ```
//!
//! `ρ` is flattened row-major. Every value is written with 17 significant
//! digits (`{:.16e}`), which round-trips an `f64` exactly.

use semigroup_forge::linalg::c;
use semigroup_forge::{CMatrix, Trajectory};

use crate::{CliError, CliResult, FORMAT_VERSION};

pub fn header(n: usize) -> String {
    let mut cols = vec!["t".to_string(), "tr".into(), "lambda_min".into(), "purity".into()];
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("re_{i}_{j}"));
            cols.push(format!("im_{i}_{j}"));
        }
    }
    cols.join(",")
}

pub fn write(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, |r| r.nrows());
    let mut out = format!("# format_version={FORMAT_VERSION}\n{}\n", header(n));
    for ((t, rho), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let mut row = vec![*t, d.trace, d.lambda_min, d.purity];
        for i in 0..n {
            for j in 0..n {
                row.push(rho[(i, j)].re);
                row.push(rho[(i, j)].im);
            }
        }
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub trace: f64,
    pub lambda_min: f64,
    pub purity: f64,
    pub rho: CMatrix,
}

pub fn parse(text: &str) -> CliResult<Vec<Row>> {
    let mut lines = text.lines();
    let version = lines.next().unwrap_or_default();
    if version != format!("# format_version={FORMAT_VERSION}") {
        return Err(CliError::Input(format!("trajectory CSV: line 1: unexpected version line `{version}`")));
    }
    let head = lines
        .next()
        .ok_or_else(|| CliError::Input("trajectory CSV: missing header".into()))?;
    let cols = head.split(',').count();
    let n = ((cols.saturating_sub(4) / 2) as f64).sqrt().round() as usize;
    if head != header(n) {
        return Err(CliError::Input("trajectory CSV: line 2: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let vals = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Input(format!("trajectory CSV: line {}: {e}", k + 3)))?;
            if vals.len() != cols {
                return Err(CliError::Input(format!(
                    "trajectory CSV: line {}: {} values, expected {cols}",
                    k + 3,
                    vals.len()
                )));
            }
            Ok(Row {
                t: vals[0],
                trace: vals[1],
                lambda_min: vals[2],
                purity: vals[3],
                rho: CMatrix::from_fn(n, n, |i, j| {
                    let base = 4 + 2 * (i * n + j);
                    c(vals[base], vals[base + 1])
                }),
            })
        })
        .collect()
}

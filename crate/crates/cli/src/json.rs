//! Complex matrices in JSON: nested rows of `[re, im]` pairs.

use semigroup_forge::linalg::c;
use semigroup_forge::CMatrix;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, FORMAT_VERSION};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn to_matrix(m: &JsonMatrix, what: &str) -> CliResult<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(CliError::Input(format!("{what}: empty matrix")));
    }
    if let Some(bad) = m.iter().position(|r| r.len() != cols) {
        return Err(CliError::Input(format!(
            "{what}: row {bad} has {} entries, expected {cols}",
            m[bad].len()
        )));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Input(format!("{what}: non-finite entry")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

/// Like [`to_matrix`] but requires an `n x n` shape.
pub fn to_square(m: &JsonMatrix, n: usize, what: &str) -> CliResult<CMatrix> {
    let out = to_matrix(m, what)?;
    if out.nrows() != n || out.ncols() != n {
        return Err(CliError::Input(format!(
            "{what}: dimension mismatch, expected {n}x{n}, got {}x{}",
            out.nrows(),
            out.ncols()
        )));
    }
    Ok(out)
}

pub fn from_matrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Density-matrix input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format_version: u32,
    pub rho: JsonMatrix,
}

impl StateFile {
    pub fn new(rho: &CMatrix) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            rho: from_matrix(rho),
        }
    }
}

/// Parses JSON, reporting syntax and schema errors with line and column.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!("{what}: line {} column {}: {e}", e.line(), e.column()))
    })
}

pub fn check_version(found: u32, what: &str) -> CliResult<()> {
    if found != FORMAT_VERSION {
        return Err(CliError::Input(format!(
            "{what}: unsupported format_version {found} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

/// Pretty JSON with a trailing newline; serialization of these plain data
/// types cannot fail.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

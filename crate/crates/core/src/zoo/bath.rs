//! Tabulated bath data: correlation functions `h_αβ(τ)` or spectral
//! densities `ĥ_αβ(ω)` on a grid, with cubic-spline interpolation.
//!
//! Text format, one grid point per line:
//!
//! ```text
//! # format_version: 1
//! # x  re h_11  im h_11  re h_12  im h_12 ...
//! 0.0  1.0 0.0  0.0 0.0 ...
//! ```
//!
//! Entries are the `m x m` matrix in row-major order as `re im` pairs, so
//! each row has `1 + 2m²` columns. Lines starting with `#` are comments
//! except for the mandatory `format_version` header. Between grid points
//! each entry is a cubic spline whose end slopes are clamped to one-sided
//! finite differences; outside the grid there is no value.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::CMatrix;

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// A matrix-valued function of one real variable.
pub trait MatrixFunction: Sync {
    /// Number of bath channels `m` (values are `m x m`).
    fn channels(&self) -> usize;
    /// Value at `x`, or `None` where the function is not defined.
    fn at(&self, x: f64) -> Option<CMatrix>;
    /// Interval on which the function is defined.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    /// Points where the function is only piecewise smooth; quadrature splits
    /// there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Closure-backed [`MatrixFunction`].
pub struct FnMatrix<F> {
    channels: usize,
    f: F,
}

impl<F: Fn(f64) -> Option<CMatrix> + Sync> FnMatrix<F> {
    pub fn new(channels: usize, f: F) -> Self {
        Self { channels, f }
    }
}

impl<F: Fn(f64) -> Option<CMatrix> + Sync> MatrixFunction for FnMatrix<F> {
    fn channels(&self) -> usize {
        self.channels
    }

    fn at(&self, x: f64) -> Option<CMatrix> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathTable {
    channels: usize,
    grid: Vec<f64>,
    values: Vec<CMatrix>,
    // spline slopes at every knot, same layout as `values`
    slopes: Vec<CMatrix>,
}

impl BathTable {
    pub fn new(grid: Vec<f64>, values: Vec<CMatrix>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidTable("at least two grid points are required".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidTable(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("grid must be finite and strictly increasing".into()));
        }
        let m = values[0].nrows();
        if m == 0 || values.iter().any(|v| v.nrows() != m || v.ncols() != m) {
            return Err(Error::InvalidTable("values must be square matrices of one size".into()));
        }
        let slopes = spline_slopes(&grid, &values);
        Ok(Self {
            channels: m,
            grid,
            values,
            slopes,
        })
    }

    /// Samples `f` on `grid`.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> CMatrix) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut width = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("format_version:") {
                    let v: u32 = v.trim().parse().map_err(|_| {
                        Error::InvalidTable(format!("line {line_no}: bad format_version"))
                    })?;
                    version = Some(v);
                }
                continue;
            }
            if version.is_none() {
                return Err(Error::InvalidTable(format!(
                    "line {line_no}: data before the format_version header"
                )));
            }
            let nums = line
                .split_whitespace()
                .enumerate()
                .map(|(col, tok)| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidTable(format!("line {line_no}, column {}: not a number: {tok}", col + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let w = *width.get_or_insert(nums.len());
            if nums.len() != w {
                return Err(Error::InvalidTable(format!(
                    "line {line_no}: expected {w} columns, found {}",
                    nums.len()
                )));
            }
            let m = channels_for_width(w).ok_or_else(|| {
                Error::InvalidTable(format!("line {line_no}: {w} columns is not 1 + 2m²"))
            })?;
            grid.push(nums[0]);
            values.push(CMatrix::from_fn(m, m, |i, j| {
                let k = 1 + 2 * (i * m + j);
                Complex64::new(nums[k], nums[k + 1])
            }));
        }
        match version {
            None => return Err(Error::InvalidTable("missing format_version header".into())),
            Some(TABLE_FORMAT_VERSION) => {}
            Some(v) => return Err(Error::InvalidTable(format!("unsupported format_version {v}"))),
        }
        Self::new(grid, values)
    }

    pub fn to_text(&self) -> String {
        let m = self.channels;
        let mut out = format!("# format_version: {TABLE_FORMAT_VERSION}\n# x");
        for i in 0..m {
            for j in 0..m {
                out.push_str(&format!(" re_{}_{} im_{}_{}", i, j, i, j));
            }
        }
        out.push('\n');
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x:.17e}"));
            for i in 0..m {
                for j in 0..m {
                    out.push_str(&format!(" {:.17e} {:.17e}", v[(i, j)].re, v[(i, j)].im));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Smallest eigenvalue of the Hermitian part over all grid values; for a
    /// spectral table this is the Bochner positivity witness.
    pub fn min_psd_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .map(linalg::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

fn channels_for_width(w: usize) -> Option<usize> {
    if w < 3 || !(w - 1).is_multiple_of(2) {
        return None;
    }
    let sq = (w - 1) / 2;
    let m = (sq as f64).sqrt().round() as usize;
    (m * m == sq).then_some(m)
}

/// Knot slopes of the C² cubic spline with end slopes fixed to the one-sided
/// difference quotients.
fn spline_slopes(x: &[f64], y: &[CMatrix]) -> Vec<CMatrix> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<CMatrix> = (0..n - 1).map(|i| (&y[i + 1] - &y[i]) * real(1.0 / h[i])).collect();
    let mut slopes = vec![linalg::zeros(y[0].nrows(), y[0].ncols()); n];
    slopes[0] = delta[0].clone();
    slopes[n - 1] = delta[n - 2].clone();
    if n == 2 {
        return slopes;
    }
    // interior equations: h_i s_{i-1} + 2(h_{i-1}+h_i) s_i + h_{i-1} s_{i+1}
    //                     = 3(h_i δ_{i-1} + h_{i-1} δ_i)
    let m = n - 2;
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs: Vec<CMatrix> = Vec::with_capacity(m);
    for k in 0..m {
        let i = k + 1;
        diag[k] = 2.0 * (h[i - 1] + h[i]);
        upper[k] = h[i - 1];
        let mut r = (&delta[i - 1] * real(h[i]) + &delta[i] * real(h[i - 1])) * real(3.0);
        if k == 0 {
            r -= &slopes[0] * real(h[i]);
        }
        if k == m - 1 {
            r -= &slopes[n - 1] * real(h[i - 1]);
        }
        rhs.push(r);
    }
    // Thomas algorithm; lower coefficient of row k is h_{k+1}
    for k in 1..m {
        let lower = h[k + 1];
        let w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        let prev = rhs[k - 1].clone();
        rhs[k] -= prev * real(w);
    }
    let mut sol = vec![linalg::zeros(y[0].nrows(), y[0].ncols()); m];
    sol[m - 1] = &rhs[m - 1] * real(1.0 / diag[m - 1]);
    for k in (0..m - 1).rev() {
        sol[k] = (&rhs[k] - &sol[k + 1] * real(upper[k])) * real(1.0 / diag[k]);
    }
    for (k, s) in sol.into_iter().enumerate() {
        slopes[k + 1] = s;
    }
    slopes
}

impl MatrixFunction for BathTable {
    fn channels(&self) -> usize {
        self.channels
    }

    fn at(&self, x: f64) -> Option<CMatrix> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let i = match self.grid.partition_point(|&g| g <= x) {
            0 => 0,
            p if p >= self.grid.len() => self.grid.len() - 2,
            p => p - 1,
        };
        let h = self.grid[i + 1] - self.grid[i];
        let t = (x - self.grid[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            &self.values[i] * real(h00)
                + &self.slopes[i] * real(h10 * h)
                + &self.values[i + 1] * real(h01)
                + &self.slopes[i + 1] * real(h11 * h),
        )
    }

    fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

/// Correlation function of an Ohmic bath `J(ω) = ηω e^{−ω/ωc}` at
/// temperature `T`,
/// `h(τ) = (1/π) ∫_0^∞ J(ω) [coth(ω/2T) cos ωτ − i sin ωτ] dω`.
///
/// With `z = 1/ωc − iτ`, expanding `coth = 1 + 2 Σ_k e^{−kω/T}` gives
/// `h(τ) = (η/π) [2T² ψ₁(Tz) − Re z⁻² ] − i (η/π) Im z⁻²` in terms of the
/// trigamma function, so no oscillatory integral is needed.
pub fn ohmic_correlation(eta: f64, omega_c: f64, temperature: f64, tau: f64) -> Result<Complex64> {
    for (name, v) in [("eta", eta), ("omega_c", omega_c), ("temperature", temperature)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau must be finite, got {tau}")));
    }
    let z = Complex64::new(1.0 / omega_c, -tau);
    let inv2 = (z * z).inv();
    let t = temperature;
    let re = 2.0 * t * t * trigamma(z * t).re - inv2.re;
    Ok(Complex64::new(re, -inv2.im) * (eta / std::f64::consts::PI))
}

/// `ψ₁(z) = Σ_{k≥0} (z + k)⁻²` for `Re z > 0`: upward recurrence to
/// `|z| ≥ 12`, then the asymptotic series.
fn trigamma(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm() < 12.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    // Bernoulli terms B_2k / z^{2k+1}
    let coeffs = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
    let mut series = Complex64::new(0.0, 0.0);
    for &b in coeffs.iter().rev() {
        series = series * w2 + b;
    }
    acc + w + w2 * 0.5 + w * w2 * series
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalar(z: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    #[test]
    fn reproduces_linear_functions_exactly() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let t = BathTable::from_fn(grid, |x| scalar(c(2.0 * x - 1.0, -x))).unwrap();
        for k in 0..50 {
            let x = k as f64 * 0.02;
            let v = t.at(x).unwrap()[(0, 0)];
            assert!((v - c(2.0 * x - 1.0, -x)).norm() < 1e-14);
        }
    }

    #[test]
    fn smooth_function_converges() {
        let f = |x: f64| c((3.0 * x).sin(), (-x).exp());
        let err = |n: usize| {
            let grid: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
            let t = BathTable::from_fn(grid, |x| scalar(f(x))).unwrap();
            (0..400)
                .map(|k| {
                    let x = 2.0 * k as f64 / 399.0;
                    (t.at(x).unwrap()[(0, 0)] - f(x)).norm()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e2 < 1e-3 && e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn interpolates_knots_exactly_and_rejects_outside() {
        let grid = vec![0.0, 0.5, 1.5, 2.0];
        let vals: Vec<CMatrix> = grid.iter().map(|&x| scalar(c(x * x, 1.0))).collect();
        let t = BathTable::new(grid.clone(), vals.clone()).unwrap();
        for (x, v) in grid.iter().zip(&vals) {
            assert!((t.at(*x).unwrap() - v).norm() < 1e-14);
        }
        assert!(t.at(-1e-9).is_none());
        assert!(t.at(2.0 + 1e-9).is_none());
    }

    #[test]
    fn text_round_trip() {
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * 0.3).collect();
        let t = BathTable::from_fn(grid, |x| {
            CMatrix::from_fn(2, 2, |i, j| c(x + i as f64, 0.1 * j as f64 - x))
        })
        .unwrap();
        let back = BathTable::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(BathTable::parse(""), Err(Error::InvalidTable(_))));
        assert!(BathTable::parse("0 1 0\n1 1 0\n").is_err());
        assert!(BathTable::parse("# format_version: 2\n0 1 0\n1 1 0\n").is_err());
        let ragged = "# format_version: 1\n0 1 0\n1 1\n";
        let e = BathTable::parse(ragged).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        assert!(BathTable::parse("# format_version: 1\n0 1 0 0\n1 1 0 0\n").is_err());
        assert!(BathTable::parse("# format_version: 1\n1 1 0\n0 1 0\n").is_err());
        assert!(BathTable::parse("# format_version: 1\n0 1 x\n").is_err());
    }

    #[test]
    fn psd_witness() {
        let t = BathTable::from_fn(vec![0.0, 1.0], |x| linalg::diag(&[1.0, x - 0.5])).unwrap();
        assert!((t.min_psd_eigenvalue() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ohmic_correlation_matches_thermal_series() {
        // coth = 1 + 2 Σ e^{−kω/T} turns the real part into
        // (η/π)[f(a) + 2 Σ f(a + k/T)] with f(u) = (u² − τ²)/(u² + τ²)²
        let (eta, wc, temp) = (0.3, 4.0, 0.7);
        for &tau in &[0.0, 0.35, 2.0, 9.0] {
            let a = 1.0 / wc;
            let f = |u: f64| (u * u - tau * tau) / (u * u + tau * tau).powi(2);
            let terms = 200_000;
            let mut sum = f(a);
            for k in 1..=terms {
                sum += 2.0 * f(a + k as f64 / temp);
            }
            // midpoint estimate of the remaining terms, ∫ f = −u/(u² + τ²)
            let b = a + (terms as f64 + 0.5) / temp;
            sum += 2.0 * temp * b / (b * b + tau * tau);
            let expected = eta / std::f64::consts::PI * sum;
            let h = ohmic_correlation(eta, wc, temp, tau).unwrap();
            assert!((h.re - expected).abs() < 1e-9 * expected.abs().max(1.0), "{tau}: {} vs {expected}", h.re);
        }
        assert_eq!(ohmic_correlation(eta, wc, temp, 0.0).unwrap().im, 0.0);
        assert!(ohmic_correlation(eta, wc, 0.0, 1.0).is_err());
    }

    #[test]
    fn ohmic_correlation_matches_direct_quadrature() {
        let (eta, wc, temp) = (0.3, 4.0, 0.7);
        for &tau in &[0.0, 0.35, 1.2] {
            let f = |w: f64| {
                let thermal = if w == 0.0 { 2.0 * temp } else { w / (w / (2.0 * temp)).tanh() };
                let j = eta * (-w / wc).exp();
                Complex64::new(thermal * j * (w * tau).cos(), -w * j * (w * tau).sin())
            };
            let r = crate::quad::integrate(f, 0.0, 60.0 * wc, 1e-12, 1e-13);
            let expected = r.value / std::f64::consts::PI;
            let h = ohmic_correlation(eta, wc, temp, tau).unwrap();
            assert!((h - expected).norm() < 1e-10, "{tau}: {h} vs {expected}");
        }
    }
}

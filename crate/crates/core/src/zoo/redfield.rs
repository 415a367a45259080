//! Redfield master equation from a bath correlation function.
//!
//! `ρ̇ = −i[H, ρ] − Σ_α [V_α, X_α ρ − ρ X_α†]` with
//! `X_α = Σ_β ∫_0^τmax h_αβ(τ) e^{−iHτ} V_β e^{iHτ} dτ`.

use num_complex::Complex64;

use super::bath::MatrixFunction;
use crate::error::{Error, Result};
use crate::generators::{Liouvillian, Superoperator};
use crate::linalg;
use crate::quad;
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedfieldOptions {
    /// Upper integration limit; defaults to the end of the function's domain.
    pub tau_max: Option<f64>,
    /// Absolute quadrature tolerance per `X_α` entry.
    pub quad_tol: f64,
    /// Largest `|h(τ)|` allowed over the last 5% of `[0, τmax]`, relative to
    /// the peak of `|h|`.
    pub tail_tol: f64,
}

impl Default for RedfieldOptions {
    fn default() -> Self {
        Self {
            tau_max: None,
            quad_tol: 1e-10,
            tail_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedfieldGenerator {
    hamiltonian: CMatrix,
    couplings: Vec<CMatrix>,
    x_ops: Vec<CMatrix>,
    superop: Superoperator,
}

impl RedfieldGenerator {
    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }

    /// The operators `X_α`.
    pub fn x_operators(&self) -> &[CMatrix] {
        &self.x_ops
    }
}

impl Liouvillian for RedfieldGenerator {
    fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = linalg::commutator(&self.hamiltonian, rho) * (-linalg::I);
        for (v, x) in self.couplings.iter().zip(&self.x_ops) {
            let inner = x * rho - rho * x.adjoint();
            out -= linalg::commutator(v, &inner);
        }
        out
    }

    fn superoperator(&self) -> Superoperator {
        self.superop.clone()
    }
}

fn magnitude_scan(bath: &dyn MatrixFunction, lo: f64, hi: f64) -> f64 {
    let mut pts: Vec<f64> = bath
        .breakpoints()
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    pts.extend((0..=64).map(|k| lo + (hi - lo) * k as f64 / 64.0));
    pts.iter()
        .filter_map(|&x| bath.at(x))
        .map(|m| linalg::max_abs(&m))
        .fold(0.0, f64::max)
}

pub fn redfield_generator(
    h: &CMatrix,
    couplings: &[CMatrix],
    bath: &dyn MatrixFunction,
    opts: RedfieldOptions,
) -> Result<RedfieldGenerator> {
    let n = h.nrows();
    if n < 1 || h.ncols() != n {
        return Err(Error::InvalidDimension(format!("Hamiltonian is {}x{}", h.nrows(), h.ncols())));
    }
    let scale = linalg::max_abs(h).max(1.0);
    let defect = linalg::hermiticity_defect(h);
    if defect > 1e-12 * scale {
        return Err(Error::NotHermitian { what: "Hamiltonian", defect });
    }
    let m = bath.channels();
    if couplings.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: couplings.len(),
        });
    }
    for v in couplings {
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.nrows(),
            });
        }
        let defect = linalg::hermiticity_defect(v);
        if defect > 1e-12 * linalg::max_abs(v).max(1.0) {
            return Err(Error::NotHermitian { what: "coupling", defect });
        }
    }
    let (lo, hi) = bath.domain();
    let tau_max = opts.tau_max.unwrap_or(hi);
    if !tau_max.is_finite() || tau_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("tau_max must be finite and positive, got {tau_max}")));
    }
    if lo > 0.0 || tau_max > hi {
        return Err(Error::InvalidParameter(format!(
            "integration range [0, {tau_max}] exceeds the correlation domain [{lo}, {hi}]"
        )));
    }
    let peak = magnitude_scan(bath, 0.0, tau_max);
    let tail = magnitude_scan(bath, 0.95 * tau_max, tau_max);
    let limit = opts.tail_tol * peak;
    if tail > limit {
        return Err(Error::NonDecayingCorrelation { tail, limit });
    }

    let (energies, u) = linalg::eigh(h);
    let v_eig: Vec<CMatrix> = couplings.iter().map(|v| u.adjoint() * v * &u).collect();

    // distinct Bohr frequencies E_m − E_n
    let mut omegas: Vec<f64> = Vec::new();
    let mut index = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            let w = energies[a] - energies[b];
            let k = match omegas.iter().position(|&o| (o - w).abs() <= 1e-12 * scale) {
                Some(k) => k,
                None => {
                    omegas.push(w);
                    omegas.len() - 1
                }
            };
            index[a * n + b] = k;
        }
    }

    let breaks = bath.breakpoints();
    let breaks = if breaks.is_empty() {
        (1..64).map(|k| tau_max * k as f64 / 64.0).collect()
    } else {
        breaks
    };
    // transforms[k][(α, β)] = ∫ h_αβ(τ) e^{−i ω_k τ} dτ
    let mut transforms = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        let mut t = linalg::zeros(m, m);
        for al in 0..m {
            for be in 0..m {
                let f = |tau: f64| {
                    let hv = bath.at(tau).map_or(linalg::ZERO, |mm| mm[(al, be)]);
                    hv * Complex64::from_polar(1.0, -w * tau)
                };
                let r = quad::integrate_pieces(f, 0.0, tau_max, &breaks, opts.quad_tol, 0.0);
                if !r.converged {
                    return Err(Error::InvalidParameter(format!(
                        "correlation quadrature did not converge at omega = {w} (error {:.3e})",
                        r.error
                    )));
                }
                t[(al, be)] = r.value;
            }
        }
        transforms.push(t);
    }

    let x_ops: Vec<CMatrix> = (0..m)
        .map(|al| {
            let x_eig = CMatrix::from_fn(n, n, |a, b| {
                let t = &transforms[index[a * n + b]];
                (0..m).map(|be| v_eig[be][(a, b)] * t[(al, be)]).sum()
            });
            &u * x_eig * u.adjoint()
        })
        .collect();

    let mut gen = RedfieldGenerator {
        hamiltonian: h.clone(),
        couplings: couplings.to_vec(),
        x_ops,
        superop: Superoperator::zero(n),
    };
    gen.superop = Superoperator::from_map(n, |x| gen.apply(x));
    Ok(gen)
}

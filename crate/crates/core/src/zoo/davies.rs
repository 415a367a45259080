//! Weak-coupling (Davies) generator.
//!
//! For every Bohr frequency `ω` of `H` the couplings are split into
//! `V_α(ω) = Σ_{ε'−ε=ω} Π(ε) V_α Π(ε')` and
//!
//! `Lρ = −i[H + H_LS, ρ] + Σ_ω Σ_αβ ĥ_αβ(ω) (V_α(ω) ρ V_β(ω)† − ½{V_β(ω)† V_α(ω), ρ})`
//!
//! with `H_LS = Σ_ω Σ_αβ s_αβ(ω) V_β(ω)† V_α(ω)` and
//! `s(ω) = (1/2π) P∫ ĥ(ξ)/(ξ − ω) dξ`.

use num_complex::Complex64;

use super::bath::MatrixFunction;
use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::generators::{GklsVerdict, GksGenerator, LindbladGenerator, Liouvillian, Superoperator};
use crate::linalg::{self, real};
use crate::quad;
use crate::{CMatrix, EIG_CUTOFF, PSD_TOL};

/// Relative gap below which energies (and Bohr frequencies) are merged.
pub const BOHR_CLUSTER_TOL: f64 = 1e-9;

/// Source of the Lamb-shift coefficients `s_αβ(ω)`.
pub enum LambShift<'a> {
    Zero,
    Supplied(&'a dyn MatrixFunction),
    /// Principal-value quadrature over the domain of `ĥ`, which must be
    /// finite; the excision radius is shrunk until successive values agree
    /// to `tol`.
    PrincipalValue { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaviesBlock {
    pub omega: f64,
    /// `V_α(ω)` for every coupling.
    pub ops: Vec<CMatrix>,
    /// `ĥ(ω)`.
    pub rates: CMatrix,
    /// `s(ω)`.
    pub lamb: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaviesGenerator {
    hamiltonian: CMatrix,
    lamb_hamiltonian: CMatrix,
    blocks: Vec<DaviesBlock>,
    superop: Superoperator,
}

/// Groups `values` whose gaps in ascending order are at most `tol`; returns
/// each group's mean and member indices.
fn cluster(values: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if values[i] - values[g[g.len() - 1]] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
        .into_iter()
        .map(|g| (g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64, g))
        .collect()
}

/// `(1/2π) P∫ f(ξ)/(ξ − ω) dξ` over the finite domain of `f`.
fn principal_value(f: &dyn MatrixFunction, omega: f64, tol: f64) -> Result<CMatrix> {
    let (a, b) = f.domain();
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(
            "principal-value Lamb shift needs a spectral function on a finite domain".into(),
        ));
    }
    let m = f.channels();
    let reach = (omega - a).min(b - omega).max(0.0);
    let knots = f.breakpoints();
    let sym_breaks: Vec<f64> = knots.iter().map(|&x| (x - omega).abs()).collect();
    let mut out = linalg::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let entry = |x: f64| f.at(x).map_or(linalg::ZERO, |v| v[(i, j)]);
            let mut total = Complex64::new(0.0, 0.0);
            // one-sided remainder outside the symmetric window
            if omega + reach < b {
                total += quad::integrate_pieces(|x| entry(x) / (x - omega), omega + reach, b, &knots, tol, 0.0).value;
            }
            if omega - reach > a {
                total += quad::integrate_pieces(|x| entry(x) / (x - omega), a, omega - reach, &knots, tol, 0.0).value;
            }
            if reach > 0.0 {
                let sym = |eps: f64| {
                    quad::integrate_pieces(
                        |u| (entry(omega + u) - entry(omega - u)) / u,
                        eps,
                        reach,
                        &sym_breaks,
                        tol,
                        0.0,
                    )
                    .value
                };
                let mut eps = 1e-2 * reach;
                let mut prev = sym(eps);
                loop {
                    eps *= 0.1;
                    let cur = sym(eps);
                    let done = (cur - prev).norm() <= tol || eps < 1e-12 * reach;
                    prev = cur;
                    if done {
                        break;
                    }
                }
                total += prev;
            }
            out[(i, j)] = total / (2.0 * std::f64::consts::PI);
        }
    }
    Ok(out)
}

pub fn davies_generator(
    h: &CMatrix,
    couplings: &[CMatrix],
    hhat: &dyn MatrixFunction,
    lamb: LambShift<'_>,
) -> Result<DaviesGenerator> {
    let n = h.nrows();
    if n < 1 || h.ncols() != n {
        return Err(Error::InvalidDimension(format!("Hamiltonian is {}x{}", h.nrows(), h.ncols())));
    }
    let defect = linalg::hermiticity_defect(h);
    if defect > 1e-12 * linalg::max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { what: "Hamiltonian", defect });
    }
    let m = hhat.channels();
    if couplings.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: couplings.len(),
        });
    }
    if let Some(v) = couplings.iter().find(|v| v.nrows() != n || v.ncols() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.nrows(),
        });
    }

    let (energies, u) = linalg::eigh(h);
    let norm = energies.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    let gap = BOHR_CLUSTER_TOL * norm;
    let levels = cluster(&energies, gap);
    let projectors: Vec<CMatrix> = levels
        .iter()
        .map(|(_, members)| {
            let mut p = linalg::zeros(n, n);
            for &k in members {
                let col = u.column(k);
                p += col * col.adjoint();
            }
            p
        })
        .collect();
    // Bohr frequency ε' − ε for every ordered pair of levels (ε, ε')
    let pairs: Vec<(usize, usize)> = (0..levels.len())
        .flat_map(|i| (0..levels.len()).map(move |j| (i, j)))
        .collect();
    let diffs: Vec<f64> = pairs.iter().map(|&(i, j)| levels[j].0 - levels[i].0).collect();
    let omegas = cluster(&diffs, gap);

    let op_scale = couplings.iter().map(linalg::max_abs).fold(0.0, f64::max).max(1.0);
    let mut blocks = Vec::new();
    for (w, members) in omegas {
        let ops: Vec<CMatrix> = couplings
            .iter()
            .map(|v| {
                let mut out = linalg::zeros(n, n);
                for &p in &members {
                    let (i, j) = pairs[p];
                    out += &projectors[i] * v * &projectors[j];
                }
                out
            })
            .collect();
        if ops.iter().all(|o| linalg::max_abs(o) <= 1e-14 * op_scale) {
            continue;
        }
        let rates = hhat.at(w).ok_or(Error::MissingSpectralData { omega: w })?;
        let lamb_coeffs = match &lamb {
            LambShift::Zero => linalg::zeros(m, m),
            LambShift::Supplied(s) => s.at(w).ok_or(Error::MissingSpectralData { omega: w })?,
            LambShift::PrincipalValue { tol } => principal_value(hhat, w, *tol)?,
        };
        blocks.push(DaviesBlock {
            omega: w,
            ops,
            rates: linalg::hermitian_part(&rates),
            lamb: linalg::hermitian_part(&lamb_coeffs),
        });
    }

    let mut lamb_hamiltonian = linalg::zeros(n, n);
    for b in &blocks {
        for al in 0..m {
            for be in 0..m {
                lamb_hamiltonian += b.ops[be].adjoint() * &b.ops[al] * b.lamb[(al, be)];
            }
        }
    }
    let lamb_hamiltonian = linalg::hermitian_part(&lamb_hamiltonian);

    let mut gen = DaviesGenerator {
        hamiltonian: h.clone(),
        lamb_hamiltonian,
        blocks,
        superop: Superoperator::zero(n),
    };
    gen.superop = Superoperator::from_map(n, |x| gen.apply(x));
    Ok(gen)
}

impl DaviesGenerator {
    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn lamb_hamiltonian(&self) -> &CMatrix {
        &self.lamb_hamiltonian
    }

    /// Bohr frequencies with at least one nonzero coupling component.
    pub fn blocks(&self) -> &[DaviesBlock] {
        &self.blocks
    }

    /// Complete positivity holds iff every `ĥ(ω)` block is positive
    /// semidefinite; the witness is the smallest block eigenvalue.
    pub fn is_gkls(&self, tol: f64) -> GklsVerdict {
        let min_eigenvalue = self
            .blocks
            .iter()
            .map(|b| linalg::min_eigenvalue(&b.rates))
            .fold(f64::INFINITY, f64::min);
        let min_eigenvalue = if min_eigenvalue.is_finite() { min_eigenvalue } else { 0.0 };
        GklsVerdict {
            is_gkls: min_eigenvalue >= -tol,
            min_eigenvalue,
        }
    }

    /// Lindblad form with jumps `√λ Σ_α u_α V_α(ω)` from each block's
    /// eigenpairs.
    pub fn to_lindblad(&self) -> Result<LindbladGenerator> {
        let mut jumps = Vec::new();
        for b in &self.blocks {
            let (vals, vecs) = linalg::eigh(&b.rates);
            let scale = vals.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            if vals[0] < -PSD_TOL * scale {
                return Err(Error::NotCompletelyPositive {
                    min_eigenvalue: vals[0],
                });
            }
            for (k, &lambda) in vals.iter().enumerate() {
                if lambda <= EIG_CUTOFF {
                    continue;
                }
                let mut op = linalg::zeros(self.dim(), self.dim());
                for (al, v) in b.ops.iter().enumerate() {
                    op += v * vecs[(al, k)];
                }
                jumps.push(op * real(lambda.sqrt()));
            }
        }
        LindbladGenerator::new(&self.hamiltonian + &self.lamb_hamiltonian, jumps)
    }

    pub fn to_gks(&self, basis: &OperatorBasis) -> Result<GksGenerator> {
        GksGenerator::from_lindblad(&self.to_lindblad()?, basis)
    }
}

impl Liouvillian for DaviesGenerator {
    fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian + &self.lamb_hamiltonian;
        let mut out = linalg::commutator(&h, rho) * (-linalg::I);
        for b in &self.blocks {
            for (al, va) in b.ops.iter().enumerate() {
                for (be, vb) in b.ops.iter().enumerate() {
                    let r = b.rates[(al, be)];
                    if r == linalg::ZERO {
                        continue;
                    }
                    let vbd = vb.adjoint();
                    let loss = &vbd * va;
                    out += (va * rho * &vbd - linalg::anticommutator(&loss, rho) * real(0.5)) * r;
                }
            }
        }
        out
    }

    fn superoperator(&self) -> Superoperator {
        self.superop.clone()
    }
}

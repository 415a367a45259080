//! Generators in GKS form, Lindblad form and as superoperator matrices.
//!
//! GKS form, for a traceless orthonormal basis `F_k`:
//!
//! ```text
//! L ρ = −i[H, ρ] + ½ Σ_kl c_kl ([F_k, ρ F_l†] + [F_k ρ, F_l†])
//!     = −i[H, ρ] + Σ_kl c_kl (F_k ρ F_l† − ½{F_l† F_k, ρ})
//! ```
//!
//! Lindblad form: `L ρ = −i[H, ρ] + Σ_j (V_j ρ V_j† − ½{V_j† V_j, ρ})`.

use num_complex::Complex64;

use crate::basis::OperatorBasis;
use crate::error::{Error, Result};
use crate::linalg::{self, real, I};
use crate::{CMatrix, CVector, EIG_CUTOFF, PSD_TOL};

/// Hermiticity / tracelessness tolerance for stored generator data, relative
/// to the largest entry (floored at one).
pub const STRUCTURE_TOL: f64 = 1e-12;

fn scaled_tol(m: &CMatrix) -> f64 {
    STRUCTURE_TOL * linalg::max_abs(m).max(1.0)
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

fn check_hermitian(m: &CMatrix, what: &'static str) -> Result<()> {
    let defect = linalg::hermiticity_defect(m);
    if defect > scaled_tol(m) {
        return Err(Error::NotHermitian { what, defect });
    }
    Ok(())
}

/// Anything that can act as the right-hand side of `ρ̇ = L ρ`.
pub trait Liouvillian {
    fn dim(&self) -> usize;
    fn apply(&self, rho: &CMatrix) -> CMatrix;
    fn superoperator(&self) -> Superoperator;
}

/// An `N² x N²` matrix acting on column-stacked `N x N` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, mat: CMatrix) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: mat.nrows(),
            });
        }
        Ok(Self { dim, mat })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            mat: linalg::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: linalg::identity(dim * dim),
        }
    }

    /// Tabulates a linear map by applying it to the matrix units `|i⟩⟨j|`.
    pub fn from_map(dim: usize, map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let n2 = dim * dim;
        let mut mat = linalg::zeros(n2, n2);
        for j in 0..dim {
            for i in 0..dim {
                let image = map(&linalg::unit(dim, i, j));
                mat.set_column(i + dim * j, &linalg::vec(&image));
            }
        }
        Self { dim, mat }
    }

    /// `−i[H, ·]`.
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let mat = (linalg::left_mul(h) - linalg::right_mul(h)) * (-I);
        Self {
            dim: h.nrows(),
            mat,
        }
    }

    /// `ρ ↦ Σ_α K_α ρ K_α†`.
    pub fn conjugation_sum(ops: &[CMatrix], dim: usize) -> Self {
        let mut mat = linalg::zeros(dim * dim, dim * dim);
        for k in ops {
            mat += linalg::kron(&k.conjugate(), k);
        }
        Self { dim, mat }
    }

    /// Lindblad dissipator `V ρ V† − ½{V†V, ρ}`.
    pub fn dissipator(v: &CMatrix) -> Self {
        let vdv = v.adjoint() * v;
        let half = real(0.5);
        let mat = linalg::kron(&v.conjugate(), v)
            - linalg::left_mul(&vdv) * half
            - linalg::right_mul(&vdv) * half;
        Self {
            dim: v.nrows(),
            mat,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn scale(&self, s: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: &self.mat * real(s),
        }
    }

    /// Dual map with respect to the Hilbert–Schmidt inner product.
    pub fn dual(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: self.mat.adjoint(),
        }
    }

    /// `e^{t L}` via scaling and squaring.
    pub fn exp(&self, t: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            mat: linalg::expm(&(&self.mat * real(t))),
        }
    }

    /// Row vector of the functional `X ↦ tr(L X)`, as an `N x N` matrix `T`
    /// with `tr(L X) = Σ_ij T_ij X_ij`.
    pub fn trace_functional(&self) -> CMatrix {
        let n = self.dim;
        CMatrix::from_fn(n, n, |i, j| {
            let col = i + n * j;
            (0..n).map(|d| self.mat[(d + n * d, col)]).sum()
        })
    }

    /// `‖X ↦ tr(L X)‖`: zero for trace-annihilating generators.
    pub fn generator_trace_defect(&self) -> f64 {
        linalg::frobenius(&self.trace_functional())
    }

    /// `‖X ↦ tr(Φ X) − tr X‖`: zero for trace-preserving maps.
    pub fn channel_trace_defect(&self) -> f64 {
        let t = self.trace_functional() - linalg::identity(self.dim);
        linalg::frobenius(&t)
    }

    /// Largest entrywise violation of `L(X)† = L(X†)`, i.e. of
    /// `mat = S·conj(mat)·S` for the stacking swap `S`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let swap = |p: usize| (p % n) * n + p / n;
        let n2 = n * n;
        let mut worst = 0.0f64;
        for q in 0..n2 {
            for p in 0..n2 {
                let d = self.mat[(p, q)] - self.mat[(swap(p), swap(q))].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

impl Liouvillian for Superoperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        linalg::unvec(&(&self.mat * linalg::vec(rho)), self.dim)
    }

    fn superoperator(&self) -> Superoperator {
        self.clone()
    }
}

/// Generator in GKS form: traceless Hamiltonian and Kossakowski matrix over a
/// fixed basis. The Kossakowski matrix need not be positive.
#[derive(Debug, Clone)]
pub struct GksGenerator {
    hamiltonian: CMatrix,
    kossakowski: CMatrix,
    basis: OperatorBasis,
    // R_k = Σ_l c_kl F_l†, so the jump part is Σ_k F_k ρ R_k
    right_factors: Vec<CMatrix>,
    // Σ_kl c_kl F_l† F_k
    loss: CMatrix,
}

impl GksGenerator {
    pub fn new(hamiltonian: CMatrix, kossakowski: CMatrix, basis: OperatorBasis) -> Result<Self> {
        let n = basis.dim();
        let m = basis.len();
        check_square(&hamiltonian, n)?;
        check_square(&kossakowski, m)?;
        check_hermitian(&hamiltonian, "Hamiltonian")?;
        let tr = hamiltonian.trace().norm();
        if tr > scaled_tol(&hamiltonian) {
            return Err(Error::NotTraceless {
                what: "GKS Hamiltonian",
                trace: tr,
            });
        }
        check_hermitian(&kossakowski, "Kossakowski matrix")?;
        let hamiltonian = linalg::hermitian_part(&hamiltonian);
        let kossakowski = linalg::hermitian_part(&kossakowski);

        let daggers: Vec<CMatrix> = basis.elements().iter().map(|f| f.adjoint()).collect();
        let mut right_factors = Vec::with_capacity(m);
        let mut loss = linalg::zeros(n, n);
        for k in 0..m {
            let mut r = linalg::zeros(n, n);
            for (l, fd) in daggers.iter().enumerate() {
                let ckl = kossakowski[(k, l)];
                if ckl != Complex64::new(0.0, 0.0) {
                    r += fd * ckl;
                }
            }
            loss += &r * basis.get(k);
            right_factors.push(r);
        }
        Ok(Self {
            hamiltonian,
            kossakowski,
            basis,
            right_factors,
            loss,
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn kossakowski(&self) -> &CMatrix {
        &self.kossakowski
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    /// Complete-positivity verdict from the spectrum of the Kossakowski matrix.
    pub fn is_gkls(&self, tol: f64) -> GklsVerdict {
        let min_eigenvalue = linalg::min_eigenvalue(&self.kossakowski);
        GklsVerdict {
            is_gkls: min_eigenvalue >= -tol,
            min_eigenvalue,
        }
    }

    /// Jump operators `V_j = √λ_j Σ_k (u_j)_k F_k` from the eigenpairs of the
    /// Kossakowski matrix. Fails if the matrix has an eigenvalue below
    /// `−PSD_TOL·max(1, ‖C‖)`.
    pub fn to_lindblad(&self) -> Result<LindbladGenerator> {
        let (vals, vecs) = linalg::eigh(&self.kossakowski);
        let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if let Some(&min) = vals.first() {
            if min < -PSD_TOL * scale {
                return Err(Error::NotCompletelyPositive {
                    min_eigenvalue: min,
                });
            }
        }
        let mut jumps = Vec::new();
        for (j, &lambda) in vals.iter().enumerate() {
            if lambda <= EIG_CUTOFF {
                continue;
            }
            let coeffs: Vec<Complex64> = vecs.column(j).iter().copied().collect();
            jumps.push(self.basis.combine(&coeffs) * real(lambda.sqrt()));
        }
        LindbladGenerator::new(self.hamiltonian.clone(), jumps)
    }

    /// Expands the jump operators in `basis`. Identity components of the
    /// jumps are absorbed into the Hamiltonian:
    /// `V = v I + A` contributes `(i/2)(v̄ A − v A†)` to `H`.
    pub fn from_lindblad(g: &LindbladGenerator, basis: &OperatorBasis) -> Result<Self> {
        let n = basis.dim();
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
        let m = basis.len();
        let sqrt_n = (n as f64).sqrt();
        let h0 = g.hamiltonian();
        let mut h = h0 - linalg::identity(n) * (h0.trace() / real(n as f64));
        let mut c = linalg::zeros(m, m);
        for v in g.jumps() {
            let e = basis.expand(v)?;
            let vid = e.identity_part / sqrt_n;
            let a = v - linalg::identity(n) * vid;
            h += (&a * vid.conj() - a.adjoint() * vid) * (I * 0.5);
            for k in 0..m {
                for l in 0..m {
                    c[(k, l)] += e.coeffs[k] * e.coeffs[l].conj();
                }
            }
        }
        Self::new(linalg::hermitian_part(&h), c, basis.clone())
    }

    /// Recovers `(H, C)` from a Hermiticity-preserving superoperator.
    ///
    /// Every such map decomposes uniquely as `L = L_gks(H, C) + {R, ·}` with a
    /// Hermitian residual `R`, which vanishes exactly when `L` annihilates the
    /// trace.
    pub fn from_superop(s: &Superoperator, basis: &OperatorBasis) -> Result<GksDecomposition> {
        let n = basis.dim();
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.dim(),
            });
        }
        let defect = s.hermiticity_defect();
        let scale = linalg::max_abs(s.matrix()).max(1.0);
        if defect > 1e-9 * scale {
            return Err(Error::NotHermiticityPreserving { defect });
        }
        let choi = crate::cp::ChoiMatrix::from_superop(s);
        let sqrt_n = (n as f64).sqrt();
        // Full orthonormal operator basis {I/√N, F_1, ..., F_{N²-1}}.
        let mut full: Vec<CVector> = Vec::with_capacity(n * n);
        full.push(linalg::vec(&(linalg::identity(n) * real(1.0 / sqrt_n))));
        full.extend(basis.elements().iter().map(linalg::vec));
        let cm = choi.matrix();
        let projected: Vec<CVector> = full.iter().map(|g| cm * g).collect();
        let chi = CMatrix::from_fn(n * n, n * n, |a, b| full[a].dotc(&projected[b]));
        let chi = linalg::hermitian_part(&chi);

        let m = basis.len();
        let c = chi.view((1, 1), (m, m)).into_owned();
        let mut f = linalg::zeros(n, n);
        for k in 0..m {
            f += basis.get(k) * (chi[(k + 1, 0)] / sqrt_n);
        }
        let h = (&f - f.adjoint()) * (I * 0.5);
        let g = (&f + f.adjoint()) * real(0.5);
        let generator = Self::new(linalg::hermitian_part(&h), c, basis.clone())?;
        let residual = g
            + linalg::identity(n) * (chi[(0, 0)] / real(2.0 * n as f64))
            + &generator.loss * real(0.5);
        Ok(GksDecomposition {
            generator,
            residual: linalg::hermitian_part(&residual),
        })
    }
}

impl Liouvillian for GksGenerator {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = linalg::commutator(&self.hamiltonian, rho) * (-I);
        for (f, r) in self.basis.elements().iter().zip(&self.right_factors) {
            out += f * rho * r;
        }
        out - linalg::anticommutator(&self.loss, rho) * real(0.5)
    }

    fn superoperator(&self) -> Superoperator {
        let n = self.dim();
        let mut s = Superoperator::hamiltonian(&self.hamiltonian);
        for (f, r) in self.basis.elements().iter().zip(&self.right_factors) {
            s.mat += linalg::sandwich(f, r);
        }
        let half = real(0.5);
        s.mat -= linalg::left_mul(&self.loss) * half + linalg::right_mul(&self.loss) * half;
        debug_assert_eq!(s.dim, n);
        s
    }
}

/// Result of [`GksGenerator::from_superop`].
#[derive(Debug, Clone)]
pub struct GksDecomposition {
    pub generator: GksGenerator,
    /// Hermitian `R` with `L = L_gks + {R, ·}`; zero for trace-preserving `L`.
    pub residual: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GklsVerdict {
    pub is_gkls: bool,
    pub min_eigenvalue: f64,
}

/// Generator in Lindblad form: Hermitian Hamiltonian plus jump operators.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
    // Σ_j V_j† V_j
    loss: CMatrix,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>) -> Result<Self> {
        let n = hamiltonian.nrows();
        check_square(&hamiltonian, n)?;
        if n == 0 {
            return Err(Error::InvalidDimension("empty Hamiltonian".into()));
        }
        check_hermitian(&hamiltonian, "Hamiltonian")?;
        let mut loss = linalg::zeros(n, n);
        for v in &jumps {
            check_square(v, n)?;
            loss += v.adjoint() * v;
        }
        Ok(Self {
            hamiltonian: linalg::hermitian_part(&hamiltonian),
            jumps,
            loss,
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    /// `Σ_j V_j† V_j`, the dual of the jump map evaluated at the identity.
    pub fn loss_operator(&self) -> &CMatrix {
        &self.loss
    }
}

impl Liouvillian for LindbladGenerator {
    fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = linalg::commutator(&self.hamiltonian, rho) * (-I);
        for v in &self.jumps {
            out += v * rho * v.adjoint();
        }
        out - linalg::anticommutator(&self.loss, rho) * real(0.5)
    }

    fn superoperator(&self) -> Superoperator {
        let mut s = Superoperator::hamiltonian(&self.hamiltonian);
        for v in &self.jumps {
            s.mat += linalg::kron(&v.conjugate(), v);
        }
        let half = real(0.5);
        s.mat -= linalg::left_mul(&self.loss) * half + linalg::right_mul(&self.loss) * half;
        s
    }
}

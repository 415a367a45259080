//! Complete positivity: Choi matrices, Kraus and Stinespring forms, block
//! positivity, and the evolution-matrix / dynamical-matrix pair.
//!
//! Choi convention (unnormalized): `𝓒 = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, so the
//! identity map has Choi matrix `Σ_ij |ii⟩⟨jj|` with top eigenvalue `N`.
//! Dividing by `N` gives the normalized projector form; PSD verdicts do not
//! depend on the factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{Liouvillian, Superoperator};
use crate::linalg::{self, real};
use crate::random;
use crate::{CMatrix, CVector};

/// Hermiticity defect above which a Choi matrix is rejected.
pub const CHOI_HERMITICITY_TOL: f64 = 1e-9;

/// Default number of restarts for the block-positivity search.
pub const DEFAULT_RESTARTS: usize = 64;

/// Default seed for randomized procedures.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_6b15;

const GRID_POINTS: usize = 129;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    mat: CMatrix,
}

impl ChoiMatrix {
    pub fn new(dim: usize, mat: CMatrix) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: mat.nrows(),
            });
        }
        Ok(Self { dim, mat })
    }

    /// `𝓒[(i,a),(j,b)] = Φ(|i⟩⟨j|)[a,b] = S[a + N b, i + N j]`.
    pub fn from_superop(s: &Superoperator) -> Self {
        let n = s.dim();
        let m = s.matrix();
        let mat = CMatrix::from_fn(n * n, n * n, |row, col| {
            let (i, a) = (row / n, row % n);
            let (j, b) = (col / n, col % n);
            m[(a + n * b, i + n * j)]
        });
        Self { dim: n, mat }
    }

    pub fn to_superop(&self) -> Superoperator {
        let n = self.dim;
        let c = &self.mat;
        let mat = CMatrix::from_fn(n * n, n * n, |row, col| {
            let (a, b) = (row % n, row / n);
            let (i, j) = (col % n, col / n);
            c[(i * n + a, j * n + b)]
        });
        Superoperator::new(n, mat).expect("square by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.mat)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    /// `λ_min(𝓒) ≥ −tol`. Errors when the map does not preserve Hermiticity.
    pub fn is_completely_positive(&self, tol: f64) -> Result<CpVerdict> {
        let defect = self.hermiticity_defect();
        if defect > CHOI_HERMITICITY_TOL * linalg::max_abs(&self.mat).max(1.0) {
            return Err(Error::NotHermiticityPreserving { defect });
        }
        let min_eigenvalue = linalg::min_eigenvalue(&self.mat);
        Ok(CpVerdict {
            is_cp: min_eigenvalue >= -tol,
            min_eigenvalue,
        })
    }

    /// Kraus operators `K_α = √λ_α unvec(v_α)` for eigenvalues `λ_α > tol`.
    pub fn kraus(&self, tol: f64) -> Result<KrausSet> {
        let defect = self.hermiticity_defect();
        if defect > CHOI_HERMITICITY_TOL * linalg::max_abs(&self.mat).max(1.0) {
            return Err(Error::NotHermiticityPreserving { defect });
        }
        let (vals, vecs) = linalg::eigh(&self.mat);
        if let Some(&min) = vals.first() {
            if min < -tol {
                return Err(Error::NotCompletelyPositive {
                    min_eigenvalue: min,
                });
            }
        }
        let n = self.dim;
        let mut ops = Vec::new();
        // largest weights first
        for (idx, &lambda) in vals.iter().enumerate().rev() {
            if lambda <= tol {
                continue;
            }
            let v: CVector = vecs.column(idx).into_owned();
            ops.push(linalg::unvec(&v, n) * real(lambda.sqrt()));
        }
        KrausSet::new(n, ops)
    }

    /// Heuristic minimum of `⟨x⊗y|𝓒|x⊗y⟩` over unit product vectors.
    pub fn block_positivity_min(&self, restarts: usize, seed: u64) -> BlockPositivity {
        block_positivity_min(&self.mat, self.dim, self.dim, restarts, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpVerdict {
    pub is_cp: bool,
    pub min_eigenvalue: f64,
}

/// Kraus operators of a map `ρ ↦ Σ_α K_α ρ K_α†`. Trace preservation is
/// reported, not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(dim: usize, ops: Vec<CMatrix>) -> Result<Self> {
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows(),
                });
            }
        }
        Ok(Self { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `Σ_α K_α† K_α`.
    pub fn dual_identity(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(linalg::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k)
    }

    /// Frobenius norm of `Σ K†K − I`.
    pub fn trace_preservation_defect(&self) -> f64 {
        linalg::frobenius(&(self.dual_identity() - linalg::identity(self.dim)))
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.ops
            .iter()
            .fold(linalg::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint())
    }

    pub fn to_superop(&self) -> Superoperator {
        Superoperator::conjugation_sum(&self.ops, self.dim)
    }

    pub fn choi(&self) -> ChoiMatrix {
        let n = self.dim;
        let mut mat = linalg::zeros(n * n, n * n);
        for k in &self.ops {
            let v = linalg::vec(k);
            mat += &v * v.adjoint();
        }
        ChoiMatrix { dim: n, mat }
    }

    /// Stacks the Kraus operators into `V = Σ_α |α⟩ ⊗ K_α`.
    pub fn stinespring(&self) -> StinespringDilation {
        let n = self.dim;
        let r = self.ops.len();
        let mut v = linalg::zeros(n * r, n);
        for (a, k) in self.ops.iter().enumerate() {
            v.view_mut((a * n, 0), (n, n)).copy_from(k);
        }
        StinespringDilation {
            dim: n,
            env_dim: r,
            isometry: v,
        }
    }
}

/// `Φ(ρ) = Tr_env(V ρ V†)` with the environment as the outer tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringDilation {
    pub dim: usize,
    pub env_dim: usize,
    pub isometry: CMatrix,
}

impl StinespringDilation {
    /// `V†V`, equal to `Σ K_α† K_α`.
    pub fn gram(&self) -> CMatrix {
        self.isometry.adjoint() * &self.isometry
    }

    /// Frobenius norm of `V†V − I`; zero exactly for trace-preserving maps.
    pub fn isometry_defect(&self) -> f64 {
        linalg::frobenius(&(self.gram() - linalg::identity(self.dim)))
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let big = &self.isometry * rho * self.isometry.adjoint();
        linalg::partial_trace_outer(&big, self.env_dim)
    }
}

/// Outcome of the product-vector minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPositivity {
    /// Best value found; an upper bound on the true minimum.
    pub min_value: f64,
    pub x: CVector,
    pub y: CVector,
    /// Value from the dense Bloch-sphere grid (two-dimensional first factor only).
    pub grid_min: Option<f64>,
    /// The verdict comes from a local search and is not a certificate.
    pub heuristic: bool,
}

impl BlockPositivity {
    pub fn is_block_positive(&self, tol: f64) -> bool {
        self.min_value >= -tol
    }
}

/// `(x† ⊗ I) M (x ⊗ I)` for `M` on `C^d1 ⊗ C^d2`.
fn contract_first(m: &CMatrix, x: &CVector, d1: usize, d2: usize) -> CMatrix {
    let mut out = linalg::zeros(d2, d2);
    for i in 0..d1 {
        for j in 0..d1 {
            let w = x[i].conj() * x[j];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            out += m.view((i * d2, j * d2), (d2, d2)) * w;
        }
    }
    out
}

/// `(I ⊗ y†) M (I ⊗ y)`.
fn contract_second(m: &CMatrix, y: &CVector, d1: usize, d2: usize) -> CMatrix {
    CMatrix::from_fn(d1, d1, |i, j| {
        let block = m.view((i * d2, j * d2), (d2, d2));
        y.dotc(&(block * y))
    })
}

fn min_eigvec(m: &CMatrix) -> (f64, CVector) {
    let (vals, vecs) = linalg::eigh(m);
    (vals[0], vecs.column(0).into_owned())
}

/// Multi-start alternating minimization of `⟨x⊗y|M|x⊗y⟩` over unit
/// `x ∈ C^d1`, `y ∈ C^d2`.
///
/// Each restart draws a random `x`, then alternates exact minimizations
/// (smallest eigenvector of the contracted matrix) until the value stalls.
/// Restarts run in parallel with independent ChaCha streams and are reduced
/// in index order, so the result depends only on `seed`. When `d1 == 2` the
/// Bloch sphere of `x` is additionally scanned on a 129 x 129 grid with `y`
/// minimized exactly.
pub fn block_positivity_min(
    m: &CMatrix,
    d1: usize,
    d2: usize,
    restarts: usize,
    seed: u64,
) -> BlockPositivity {
    let m = linalg::hermitian_part(m);
    let runs: Vec<(f64, CVector, CVector)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut x = random::unit_vector(&mut rng, d1);
            let (mut value, mut y) = min_eigvec(&contract_first(&m, &x, d1, d2));
            for _ in 0..500 {
                let (_, nx) = min_eigvec(&contract_second(&m, &y, d1, d2));
                x = nx;
                let (nv, ny) = min_eigvec(&contract_first(&m, &x, d1, d2));
                y = ny;
                let done = (value - nv).abs() <= 1e-15 * value.abs().max(1.0);
                value = nv;
                if done {
                    break;
                }
            }
            (value, x, y)
        })
        .collect();
    let (mut min_value, mut x, mut y) = runs
        .into_iter()
        .reduce(|best, cur| if cur.0 < best.0 { cur } else { best })
        .expect("at least one restart");

    let grid_min = if d1 == 2 {
        let (gv, gx, gy) = bloch_grid_min(&m, d2);
        if gv < min_value {
            min_value = gv;
            x = gx;
            y = gy;
        }
        Some(gv)
    } else {
        None
    };
    BlockPositivity {
        min_value,
        x,
        y,
        grid_min,
        heuristic: true,
    }
}

fn bloch_grid_min(m: &CMatrix, d2: usize) -> (f64, CVector, CVector) {
    let mut best = (f64::INFINITY, CVector::zeros(2), CVector::zeros(d2));
    for a in 0..GRID_POINTS {
        let theta = std::f64::consts::PI * a as f64 / (GRID_POINTS - 1) as f64;
        for b in 0..GRID_POINTS {
            let phi = 2.0 * std::f64::consts::PI * b as f64 / GRID_POINTS as f64;
            let x = CVector::from_vec(vec![
                real((theta / 2.0).cos()),
                num_complex::Complex64::from_polar((theta / 2.0).sin(), phi),
            ]);
            let (v, y) = min_eigvec(&contract_first(m, &x, 2, d2));
            if v < best.0 {
                best = (v, x, y);
            }
        }
    }
    best
}

/// Sampled evidence about `k`-positivity of the map `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KPositivitySample {
    /// Smallest value of `⟨z|(id_k ⊗ Φ)(|w⟩⟨w|)|z⟩` seen.
    pub min_value: f64,
    pub witness: CVector,
}

/// Monte-Carlo oracle for `k`-positivity: draws Haar-random `|w⟩ ∈ C^k ⊗ C^N`
/// and evaluates `(id_k ⊗ Φ)(|w⟩⟨w|)`, minimizing over `|z⟩` exactly (its
/// smallest eigenvalue). Works through the map's action only, never the
/// Choi matrix.
pub fn k_positivity_oracle(s: &Superoperator, k: usize, samples: usize, seed: u64) -> KPositivitySample {
    assert!(k >= 1, "k must be at least 1");
    let n = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = KPositivitySample {
        min_value: f64::INFINITY,
        witness: CVector::zeros(k * n),
    };
    for _ in 0..samples {
        let w = random::unit_vector(&mut rng, k * n);
        let blocks: Vec<CVector> = (0..k).map(|i| w.rows(i * n, n).into_owned()).collect();
        let mut big = linalg::zeros(k * n, k * n);
        for i in 0..k {
            for j in 0..k {
                let image = s.apply(&(&blocks[i] * blocks[j].adjoint()));
                big.view_mut((i * n, j * n), (n, n)).copy_from(&image);
            }
        }
        let value = linalg::min_eigenvalue(&big);
        if value < best.min_value {
            best = KPositivitySample {
                min_value: value,
                witness: w,
            };
        }
    }
    best
}

/// The evolution matrix `A` (`ρ_rs ↦ Σ A_{rs,r's'} ρ_{r's'}`) and its
/// realignment `B_{rr',ss'} = A_{rs,r's'}`. Pair indices are row-major:
/// `(r, s) ↦ r·N + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrixPair {
    pub dim: usize,
    pub a: CMatrix,
    pub b: CMatrix,
}

/// `A[r·N + s, r'·N + s'] = S[r + N s, r' + N s']`.
pub fn evolution_matrix(s: &Superoperator) -> CMatrix {
    let n = s.dim();
    let m = s.matrix();
    CMatrix::from_fn(n * n, n * n, |row, col| {
        let (r, ss) = (row / n, row % n);
        let (rp, sp) = (col / n, col % n);
        m[(r + n * ss, rp + n * sp)]
    })
}

pub fn superop_from_evolution(a: &CMatrix, dim: usize) -> Superoperator {
    let n = dim;
    let mat = CMatrix::from_fn(n * n, n * n, |row, col| {
        let (r, ss) = (row % n, row / n);
        let (rp, sp) = (col % n, col / n);
        a[(r * n + ss, rp * n + sp)]
    });
    Superoperator::new(n, mat).expect("square by construction")
}

/// Swaps the second and third of the four indices `(r, s, r', s')`. The
/// permutation is its own inverse.
fn swap_middle(m: &CMatrix, n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n * n, |row, col| {
        let (r, rp) = (row / n, row % n);
        let (s, sp) = (col / n, col % n);
        m[(r * n + s, rp * n + sp)]
    })
}

fn pair_dim(m: &CMatrix) -> Result<usize> {
    let n = (m.nrows() as f64).sqrt().round() as usize;
    if m.nrows() != m.ncols() || n * n != m.nrows() {
        return Err(Error::InvalidDimension(format!(
            "expected an N^2 x N^2 matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(n)
}

pub fn realign(a: &CMatrix) -> Result<DynamicalMatrixPair> {
    let n = pair_dim(a)?;
    Ok(DynamicalMatrixPair {
        dim: n,
        a: a.clone(),
        b: swap_middle(a, n),
    })
}

/// Inverse realignment `B ↦ A`.
pub fn unrealign(b: &CMatrix) -> Result<CMatrix> {
    let n = pair_dim(b)?;
    Ok(swap_middle(b, n))
}

/// The three conditions on an evolution matrix, plus both readings of the
/// positivity condition on the dynamical matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmrReport {
    /// `max |A_{sr,s'r'} − conj(A_{rs,r's'})|`.
    pub hermiticity_defect: f64,
    /// `max |Σ_r A_{rr,r's'} − δ_{r's'}|`.
    pub trace_preservation_defect: f64,
    /// Heuristic minimum of `Σ x̄_r x_s A_{rs,r's'} y_{r'} ȳ_{s'}` over unit
    /// `x, y`: block positivity of `B`, i.e. positivity of the map.
    pub block_positivity: BlockPositivity,
    /// `λ_min(B)`: the full positivity of `B` (complete positivity).
    pub dynamical_min_eigenvalue: f64,
}

impl SmrReport {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect <= tol
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.block_positivity.is_block_positive(tol)
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.dynamical_min_eigenvalue >= -tol
    }

    pub fn all_pass(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.is_trace_preserving(tol) && self.is_positive(tol)
    }
}

pub fn smr_conditions(a: &CMatrix, restarts: usize, seed: u64) -> Result<SmrReport> {
    let n = pair_dim(a)?;
    let mut herm = 0.0f64;
    for r in 0..n {
        for s in 0..n {
            for rp in 0..n {
                for sp in 0..n {
                    let d = a[(s * n + r, sp * n + rp)] - a[(r * n + s, rp * n + sp)].conj();
                    herm = herm.max(d.norm());
                }
            }
        }
    }
    let mut tp = 0.0f64;
    for rp in 0..n {
        for sp in 0..n {
            let sum: num_complex::Complex64 = (0..n).map(|r| a[(r * n + r, rp * n + sp)]).sum();
            let target = if rp == sp { 1.0 } else { 0.0 };
            tp = tp.max((sum - real(target)).norm());
        }
    }
    let b = swap_middle(a, n);
    // Σ x̄_r x_s B_{rr',ss'} y_{r'} ȳ_{s'} = ⟨x⊗ȳ|B|x⊗ȳ⟩
    let block_positivity = block_positivity_min(&b, n, n, restarts, seed);
    let dynamical_min_eigenvalue = linalg::min_eigenvalue(&b);
    Ok(SmrReport {
        hermiticity_defect: herm,
        trace_preservation_defect: tp,
        block_positivity,
        dynamical_min_eigenvalue,
    })
}

/// `B = Σ_α μ_α vec(W_α) vec(W_α)†` with `(W_α)_{rr'}` read row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmrDecomposition {
    pub weights: Vec<f64>,
    pub ops: Vec<CMatrix>,
}

impl SmrDecomposition {
    /// `ρ ↦ Σ μ_α W_α ρ W_α†`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.weights
            .iter()
            .zip(&self.ops)
            .fold(linalg::zeros(rho.nrows(), rho.ncols()), |acc, (&mu, w)| {
                acc + w * rho * w.adjoint() * real(mu)
            })
    }

    /// The same channel as a Kraus set with weights absorbed.
    pub fn to_kraus(&self) -> KrausSet {
        let n = self.ops.first().map_or(0, |w| w.nrows());
        let ops = self
            .weights
            .iter()
            .zip(&self.ops)
            .map(|(&mu, w)| w * real(mu.sqrt()))
            .collect();
        KrausSet::new(n, ops).expect("uniform dimension")
    }
}

/// Eigendecomposition of a positive semidefinite dynamical matrix. Only
/// block-positive `B` (a positive but not completely positive map) has no
/// such decomposition and is rejected.
pub fn smr_decompose(b: &CMatrix, tol: f64) -> Result<SmrDecomposition> {
    let n = pair_dim(b)?;
    let defect = linalg::hermiticity_defect(b);
    if defect > CHOI_HERMITICITY_TOL * linalg::max_abs(b).max(1.0) {
        return Err(Error::NotHermitian {
            what: "dynamical matrix",
            defect,
        });
    }
    let (vals, vecs) = linalg::eigh(b);
    if vals[0] < -tol {
        return Err(Error::NotPositiveDynamicalMatrix {
            min_eigenvalue: vals[0],
        });
    }
    let mut weights = Vec::new();
    let mut ops = Vec::new();
    for (idx, &mu) in vals.iter().enumerate().rev() {
        if mu <= tol {
            continue;
        }
        let e = vecs.column(idx);
        weights.push(mu);
        ops.push(CMatrix::from_fn(n, n, |r, rp| e[r * n + rp]));
    }
    Ok(SmrDecomposition { weights, ops })
}

/// Transpose map `ρ ↦ ρᵀ`.
pub fn transpose_map(dim: usize) -> Superoperator {
    Superoperator::from_map(dim, |x| x.transpose())
}

/// Completely depolarizing map `ρ ↦ tr(ρ) I / N`.
pub fn depolarizing_map(dim: usize) -> Superoperator {
    Superoperator::from_map(dim, |x| linalg::identity(dim) * (x.trace() / real(dim as f64)))
}

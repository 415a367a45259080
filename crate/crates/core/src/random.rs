//! Seeded random ensembles: states, channels and generators.
//!
//! Every function takes the RNG explicitly; callers seed a `ChaCha8Rng` so
//! results are reproducible across runs and platforms.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::OperatorBasis;
use crate::cp::KrausSet;
use crate::generators::{GksGenerator, LindbladGenerator};
use crate::linalg::{self, real};
use crate::semigroup::DensityMatrix;
use crate::{CMatrix, CVector};

/// Standard complex normal sample, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    linalg::hermitian_part(&ginibre(rng, n, n))
}

pub fn traceless_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let h = hermitian(rng, n);
    let shift = h.trace() / real(n as f64);
    h - linalg::identity(n) * shift
}

/// Haar-random unit vector.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / real(norm)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let v = unit_vector(rng, n);
    DensityMatrix::new(&v * v.adjoint()).expect("projector is a state")
}

/// Full-rank state from the Hilbert–Schmidt (Ginibre) ensemble.
pub fn mixed_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(linalg::hermitian_part(&(rho / tr))).expect("normalized Gram matrix is a state")
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`).
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    linalg::orthonormalize_columns(&ginibre(rng, rows, cols))
}

/// Trace-preserving channel with `rank` Kraus operators cut from a random
/// isometry `C^n -> C^rank ⊗ C^n`.
pub fn kraus_channel<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> KrausSet {
    let v = isometry(rng, n * rank, n);
    let ops = (0..rank)
        .map(|a| v.view((a * n, 0), (n, n)).into_owned())
        .collect();
    KrausSet::new(n, ops).expect("square blocks")
}

/// Random positive semidefinite matrix of the given rank, unit trace.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, n, rank);
    let m = &g * g.adjoint();
    let tr = m.trace();
    linalg::hermitian_part(&(m / tr))
}

/// Random GKS generator with Kossakowski matrix of trace `rate`.
///
/// With `indefinite = true` a rank-one negative part is subtracted so that
/// the smallest eigenvalue is `−rate/2` on a random direction; the result
/// is then not completely positive.
pub fn gks_generator<R: Rng + ?Sized>(
    rng: &mut R,
    basis: &OperatorBasis,
    rate: f64,
    indefinite: bool,
) -> GksGenerator {
    let n = basis.dim();
    let m = basis.len();
    let rank = rng.random_range(1..=m);
    let mut c = psd(rng, m, rank) * real(rate);
    if indefinite {
        // project the negative direction out of the positive part first so
        // the resulting eigenvalue is exact
        let u = unit_vector(rng, m);
        let p = linalg::identity(m) - &u * u.adjoint();
        c = &p * c * &p - &u * u.adjoint() * real(0.5 * rate);
    }
    let h = traceless_hermitian(rng, n);
    GksGenerator::new(h, linalg::hermitian_part(&c), basis.clone()).expect("valid random generator")
}

/// Random Lindblad generator with `jumps` Ginibre jump operators scaled by
/// `rate.sqrt()`.
pub fn lindblad_generator<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    jumps: usize,
    rate: f64,
) -> LindbladGenerator {
    let h = hermitian(rng, n);
    let ops = (0..jumps)
        .map(|_| ginibre(rng, n, n) * real((rate / n as f64).sqrt()))
        .collect();
    LindbladGenerator::new(h, ops).expect("valid random generator")
}

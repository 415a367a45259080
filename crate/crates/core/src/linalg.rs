//! Dense complex linear-algebra helpers shared by every module.
//!
//! Superoperators use column stacking throughout: `vec(X)[i + N*j] = X[(i, j)]`,
//! so that `vec(A X B) = (B^T ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMatrix, CVector};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    DMatrix::identity(n, n)
}

pub fn zeros(n: usize, m: usize) -> CMatrix {
    DMatrix::zeros(n, m)
}

/// Column-stacks a square matrix.
pub fn vec(x: &CMatrix) -> CVector {
    // nalgebra storage is already column-major
    DVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`] for an `n x n` matrix.
pub fn unvec(v: &CVector, n: usize) -> CMatrix {
    assert_eq!(v.len(), n * n, "unvec: length {} is not {}^2", v.len(), n);
    DMatrix::from_column_slice(n, n, v.as_slice())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Superoperator of `X -> A X B` in the column-stacking convention.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), a)
}

/// Superoperator of `X -> A X`.
pub fn left_mul(a: &CMatrix) -> CMatrix {
    kron(&identity(a.nrows()), a)
}

/// Superoperator of `X -> X B`.
pub fn right_mul(b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), &identity(b.nrows()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.trace()
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * real(0.5)
}

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum.
pub fn norm_one(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues ascending.
///
/// Returns the eigenvalues and a matrix whose columns are the matching
/// orthonormal eigenvectors. Exactly zero rows are deflated first (each is
/// an eigenpair `(0, e_j)`): the implicit QR iteration can produce NaN on
/// matrices with many exactly zero rows, as Kossakowski matrices of sparse
/// generators have. A cyclic Jacobi sweep takes over if it still does.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(a);
    let live: Vec<usize> = (0..n).filter(|&i| h.row(i).iter().any(|z| *z != ZERO)).collect();
    let m = live.len();
    let sub = CMatrix::from_fn(m, m, |i, j| h[(live[i], live[j])]);
    let (sub_vals, sub_vecs) = if m == 0 {
        (Vec::new(), zeros(0, 0))
    } else {
        let eig = sub.clone().symmetric_eigen();
        let finite = eig.eigenvalues.iter().all(|x| x.is_finite())
            && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite {
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        } else {
            jacobi_eigh(&sub)
        }
    };

    // (value, column in the full space)
    let mut pairs: Vec<(f64, CVector)> = Vec::with_capacity(n);
    for (k, &v) in sub_vals.iter().enumerate() {
        let mut col = CVector::zeros(n);
        for (i, &li) in live.iter().enumerate() {
            col[li] = sub_vecs[(i, k)];
        }
        pairs.push((v, col));
    }
    for i in (0..n).filter(|i| live.binary_search(i).is_err()) {
        let mut col = CVector::zeros(n);
        col[i] = ONE;
        pairs.push((0.0, col));
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let mut vectors = zeros(n, n);
    for (dst, (_, col)) in pairs.iter().enumerate() {
        vectors.set_column(dst, col);
    }
    (values, vectors)
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
fn jacobi_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // rotate in the (p, q) plane after removing the phase of a_pq
                let phase = apq / r;
                let theta = 0.5 * (m[(q, q)].re - m[(p, p)].re) / r;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let sp = phase * s;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * sp.conj();
                    m[(k, q)] = mkp * sp + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * sp;
                    m[(q, k)] = mpk * sp.conj() + mqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), v)
}

pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    eigh(a).0
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    eigvalsh(a).first().copied().unwrap_or(0.0)
}

/// Trace norm of the Hermitian part of `a` (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    eigvalsh(a).iter().map(|x| x.abs()).sum()
}

/// Trace distance `½‖ρ − σ‖₁` between two Hermitian matrices.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    0.5 * trace_norm_hermitian(&(rho - sigma))
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(a: &CMatrix) -> Vec<Complex64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (_, t) = a.clone().schur().unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Matrix square root of a positive semidefinite Hermitian matrix; negative
/// eigenvalues are clipped to zero.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| real(x.max(0.0).sqrt())));
    &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Gram–Schmidt orthonormalization of the columns of `a` (thin Q factor).
pub fn orthonormalize_columns(a: &CMatrix) -> CMatrix {
    let mut q = a.clone();
    for j in 0..q.ncols() {
        for k in 0..j {
            let proj = q.column(k).dotc(&q.column(j));
            let qk = q.column(k).into_owned();
            let mut col = q.column_mut(j);
            col -= qk * proj;
        }
        let nrm = q.column(j).norm();
        if nrm > 0.0 {
            let mut col = q.column_mut(j);
            col /= real(nrm);
        }
    }
    q
}

/// Partial trace over the *outer* (first) tensor factor of dimension `outer`
/// for a matrix on `C^outer ⊗ C^inner`.
pub fn partial_trace_outer(a: &CMatrix, outer: usize) -> CMatrix {
    let inner = a.nrows() / outer;
    let mut out = zeros(inner, inner);
    for k in 0..outer {
        out += a.view((k * inner, k * inner), (inner, inner));
    }
    out
}

/// Partial trace over the *inner* (second) tensor factor of dimension `inner`.
pub fn partial_trace_inner(a: &CMatrix, inner: usize) -> CMatrix {
    let outer = a.nrows() / inner;
    CMatrix::from_fn(outer, outer, |i, j| {
        (0..inner).map(|k| a[(i * inner + k, j * inner + k)]).sum()
    })
}

pub fn matrix_from_rows(rows: &[&[Complex64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| real(x)),
    ))
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn pauli_x() -> CMatrix {
    matrix_from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> CMatrix {
    matrix_from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    matrix_from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
}

pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm bounds below which the degree-m approximant meets unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with diagonal Padé
/// approximants of degree 3, 5, 7, 9 or 13.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm: matrix must be square");
    if n == 0 {
        return a.clone();
    }
    let norm = norm_one(a);
    if norm == 0.0 {
        return identity(n);
    }
    let id = identity(n);
    for (theta, coeffs) in [
        (THETA3, &PADE3[..]),
        (THETA5, &PADE5[..]),
        (THETA7, &PADE7[..]),
        (THETA9, &PADE9[..]),
    ] {
        if norm <= theta {
            let (u, v) = pade_low(a, coeffs, &id);
            return pade_solve(&u, &v);
        }
    }
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a * real(0.5f64.powi(s));
    let (u, v) = pade13(&scaled, &id);
    let mut r = pade_solve(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64], id: &CMatrix) -> (CMatrix, CMatrix) {
    let a2 = a * a;
    let mut u = id * real(b[1]);
    let mut v = id * real(b[0]);
    let mut power = id.clone();
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += &power * real(b[2 * k + 1]);
        v += &power * real(b[2 * k]);
    }
    (a * u, v)
}

fn pade13(a: &CMatrix, id: &CMatrix) -> (CMatrix, CMatrix) {
    let b = |k: usize| real(PADE13[k]);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = a * (&a6 * inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + id * b(1));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + id * b(0);
    (u, v)
}

fn pade_solve(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("expm: Padé denominator is singular")
}

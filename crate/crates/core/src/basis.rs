//! Orthonormal traceless Hermitian operator bases.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, real, I, ONE};
use crate::CMatrix;

/// Tolerance used when verifying tracelessness and Hilbert–Schmidt
/// orthonormality of a basis.
pub const BASIS_TOL: f64 = 1e-12;

/// An ordered family of `N² − 1` traceless `N x N` matrices, orthonormal in
/// the Hilbert–Schmidt inner product `tr(F_k F_l†) = δ_kl`.
///
/// Cloning is cheap; the elements live behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Arc<Vec<CMatrix>>,
}

impl OperatorBasis {
    /// Generalized Gell-Mann matrices normalized to unit Hilbert–Schmidt
    /// norm, ordered symmetric, then antisymmetric, then diagonal.
    ///
    /// Within the off-diagonal groups the index pairs `(j, k)`, `j < k`, run
    /// lexicographically; diagonal element `l` (1-based) is proportional to
    /// `Σ_{m<l} |m⟩⟨m| − l |l⟩⟨l|`. For `N = 2` this is `σ₁, σ₂, σ₃` over √2.
    pub fn gell_mann(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "operator basis needs N >= 2, got {dim}"
            )));
        }
        let norm = real(std::f64::consts::FRAC_1_SQRT_2);
        let mut elements = Vec::with_capacity(dim * dim - 1);
        for j in 0..dim {
            for k in j + 1..dim {
                let mut m = linalg::zeros(dim, dim);
                m[(j, k)] = ONE;
                m[(k, j)] = ONE;
                elements.push(m * norm);
            }
        }
        for j in 0..dim {
            for k in j + 1..dim {
                let mut m = linalg::zeros(dim, dim);
                m[(j, k)] = -I;
                m[(k, j)] = I;
                elements.push(m * norm);
            }
        }
        for l in 1..dim {
            let scale = (1.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = linalg::zeros(dim, dim);
            for d in 0..l {
                m[(d, d)] = real(scale);
            }
            m[(l, l)] = real(-(l as f64) * scale);
            elements.push(m);
        }
        Ok(Self {
            dim,
            elements: Arc::new(elements),
        })
    }

    /// Wraps user-supplied elements after checking the basis invariants.
    pub fn from_elements(elements: Vec<CMatrix>) -> Result<Self> {
        let count = elements.len();
        let dim = (((count + 1) as f64).sqrt().round()) as usize;
        if dim < 2 || dim * dim != count + 1 {
            return Err(Error::InvalidDimension(format!(
                "{count} elements is not N^2 - 1 for any N >= 2"
            )));
        }
        for el in &elements {
            if el.nrows() != dim || el.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: el.nrows(),
                });
            }
        }
        let basis = Self {
            dim,
            elements: Arc::new(elements),
        };
        basis.verify(BASIS_TOL)?;
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `N² − 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.elements[k]
    }

    /// Largest violations of tracelessness, orthonormality and Hermiticity.
    pub fn defects(&self) -> BasisDefects {
        let mut out = BasisDefects::default();
        for (k, fk) in self.elements.iter().enumerate() {
            out.trace = out.trace.max(fk.trace().norm());
            out.hermiticity = out.hermiticity.max(linalg::hermiticity_defect(fk));
            for (l, fl) in self.elements.iter().enumerate() {
                let ip = hs_inner(fl, fk);
                let target = if k == l { 1.0 } else { 0.0 };
                out.orthonormality = out.orthonormality.max((ip - real(target)).norm());
            }
        }
        out
    }

    pub fn verify(&self, tol: f64) -> Result<()> {
        let d = self.defects();
        if d.trace > tol {
            return Err(Error::NotTraceless {
                what: "basis element",
                trace: d.trace,
            });
        }
        if d.orthonormality > tol {
            return Err(Error::InvalidParameter(format!(
                "basis is not orthonormal (defect {:.3e})",
                d.orthonormality
            )));
        }
        if d.hermiticity > tol {
            return Err(Error::NotHermitian {
                what: "basis element",
                defect: d.hermiticity,
            });
        }
        Ok(())
    }

    /// Expands `x = c0·I/√N + Σ_k coeffs_k F_k`.
    pub fn expand(&self, x: &CMatrix) -> Result<Expansion> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        let sqrt_n = (self.dim as f64).sqrt();
        let identity_part = x.trace() / sqrt_n;
        let coeffs = self.elements.iter().map(|f| hs_inner(f, x)).collect();
        Ok(Expansion {
            identity_part,
            coeffs,
        })
    }

    /// Inverse of [`expand`](Self::expand).
    pub fn reconstruct(&self, expansion: &Expansion) -> CMatrix {
        let sqrt_n = (self.dim as f64).sqrt();
        let mut out = linalg::identity(self.dim) * (expansion.identity_part / sqrt_n);
        for (f, &a) in self.elements.iter().zip(&expansion.coeffs) {
            out += f * a;
        }
        out
    }

    /// `Σ_k coeffs_k F_k` for a traceless combination.
    pub fn combine(&self, coeffs: &[Complex64]) -> CMatrix {
        let mut out = linalg::zeros(self.dim, self.dim);
        for (f, &a) in self.elements.iter().zip(coeffs) {
            if a != Complex64::new(0.0, 0.0) {
                out += f * a;
            }
        }
        out
    }
}

/// Coefficients of an operator in `{I/√N} ∪ basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub identity_part: Complex64,
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BasisDefects {
    pub trace: f64,
    pub orthonormality: f64,
    pub hermiticity: f64,
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius, paulis};
    use proptest::prelude::*;

    #[test]
    fn qubit_basis_is_scaled_paulis() {
        let b = OperatorBasis::gell_mann(2).unwrap();
        for (f, s) in b.elements().iter().zip(paulis()) {
            assert!(frobenius(&(f - s * real(std::f64::consts::FRAC_1_SQRT_2))) < 1e-15);
        }
        assert!(hs_inner(b.get(1), b.get(0)).norm() < 1e-15);
    }

    #[test]
    fn gell_mann_invariants_hold_up_to_six() {
        for n in 2..=6 {
            let b = OperatorBasis::gell_mann(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            b.verify(BASIS_TOL).unwrap();
        }
    }

    #[test]
    fn qutrit_basis_has_eight_orthonormal_elements() {
        let b = OperatorBasis::gell_mann(3).unwrap();
        assert_eq!(b.len(), 8);
        let d = b.defects();
        assert!(d.trace <= 1e-12 && d.orthonormality <= 1e-12);
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(matches!(
            OperatorBasis::gell_mann(1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn expand_identity_and_sigma_z() {
        let b = OperatorBasis::gell_mann(2).unwrap();
        let e = b.expand(&linalg::identity(2)).unwrap();
        assert!((e.identity_part - real(2f64.sqrt())).norm() < 1e-15);
        assert!(e.coeffs.iter().all(|z| z.norm() < 1e-15));

        let e = b.expand(&linalg::pauli_z()).unwrap();
        assert!(e.identity_part.norm() < 1e-15);
        assert!(e.coeffs[0].norm() < 1e-15 && e.coeffs[1].norm() < 1e-15);
        assert!((e.coeffs[2] - real(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn expand_rejects_wrong_dimension() {
        let b = OperatorBasis::gell_mann(3).unwrap();
        assert!(b.expand(&linalg::identity(2)).is_err());
    }

    #[test]
    fn from_elements_rejects_non_orthonormal() {
        let mut els = OperatorBasis::gell_mann(2).unwrap().elements().to_vec();
        els[0] = els[0].clone() * real(2.0);
        assert!(OperatorBasis::from_elements(els).is_err());
    }

    proptest! {
        #[test]
        fn expand_reconstruct_round_trip(n in 2usize..=5, entries in proptest::collection::vec(-1.0f64..1.0, 50)) {
            let b = OperatorBasis::gell_mann(n).unwrap();
            let x = CMatrix::from_fn(n, n, |i, j| c(entries[(i * n + j) % 50], entries[(i + 3 * j + 7) % 50]));
            let back = b.reconstruct(&b.expand(&x).unwrap());
            let rel = frobenius(&(&back - &x)) / frobenius(&x).max(1e-300);
            prop_assert!(rel < 1e-10);
        }
    }
}

//! Generators of quantum dynamical semigroups in finite dimension.
//!
//! The crate builds generators in GKS form (Hamiltonian plus Kossakowski
//! matrix over a traceless orthonormal basis), in Lindblad form (Hamiltonian
//! plus jump operators) and as raw superoperators, converts between them,
//! decides complete positivity, positivity and trace preservation, and
//! evolves density matrices under the resulting master equations.
//!
//! Superoperators act on column-stacked matrices; see [`linalg::vec`].

pub mod basis;
pub mod cp;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod quad;
pub mod random;
pub mod semigroup;
pub mod zoo;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub use basis::OperatorBasis;
pub use cp::{ChoiMatrix, DynamicalMatrixPair, KrausSet};
pub use error::{Error, Result};
pub use generators::{GksGenerator, LindbladGenerator, Liouvillian, Superoperator};
pub use semigroup::{DensityMatrix, Trajectory};

/// Cutoff below which eigenvalues of Kossakowski or Choi matrices are treated
/// as zero when extracting jump or Kraus operators.
pub const EIG_CUTOFF: f64 = 1e-12;

/// Default tolerance for positive-semidefiniteness verdicts.
pub const PSD_TOL: f64 = 1e-9;

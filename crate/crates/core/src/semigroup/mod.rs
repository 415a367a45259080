//! Time evolution under a generator and the diagnostics that go with it.

pub mod ode;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cp::ChoiMatrix;
use crate::error::{Error, Result};
use crate::generators::{Liouvillian, Superoperator};
use crate::linalg::{self, real};
use crate::random;
use crate::{CMatrix, CVector};

pub use ode::OdeTolerances;

/// Validation tolerance for [`DensityMatrix`] construction.
pub const STATE_TOL: f64 = 1e-10;

/// Resolution of the bisection that locates the first loss of complete
/// positivity along a trajectory.
pub const VIOLATION_TIME_RESOLUTION: f64 = 1e-4;

/// Hermitian, unit-trace, positive semidefinite matrix (within
/// [`STATE_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerance(mat, STATE_TOL)
    }

    pub fn with_tolerance(mat: CMatrix, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "expected a non-empty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = linalg::hermiticity_defect(&mat);
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr - real(1.0)).norm() > tol {
            return Err(Error::InvalidState(format!(
                "trace is {:.12} instead of 1",
                tr.re
            )));
        }
        let min = linalg::min_eigenvalue(&mat);
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = psi / real(norm);
        Self::new(&v * v.adjoint())
    }

    /// `|k⟩⟨k|` in dimension `n`.
    pub fn basis_state(n: usize, k: usize) -> Self {
        Self {
            mat: linalg::unit(n, k, k),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            mat: linalg::identity(n) * real(1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        purity(&self.mat)
    }
}

fn purity(m: &CMatrix) -> f64 {
    (m * m).trace().re
}

/// Gibbs state `e^{−H/T} / Z`.
pub fn gibbs_state(h: &CMatrix, temperature: f64) -> Result<DensityMatrix> {
    if temperature <= 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let (vals, vecs) = linalg::eigh(h);
    let e0 = vals[0];
    let weights: Vec<f64> = vals.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let d = linalg::diag(&weights.iter().map(|w| w / z).collect::<Vec<_>>());
    let rho = &vecs * d * vecs.adjoint();
    DensityMatrix::new(linalg::hermitian_part(&rho))
}

/// Per-sample diagnostics of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub trace: f64,
    pub lambda_min: f64,
    pub purity: f64,
    pub hermiticity_defect: f64,
}

impl StepDiagnostics {
    pub fn of(rho: &CMatrix) -> Self {
        Self {
            trace: rho.trace().re,
            lambda_min: linalg::min_eigenvalue(rho),
            purity: purity(rho),
            hermiticity_defect: linalg::hermiticity_defect(rho),
        }
    }
}

/// Sampled solution of `ρ̇ = L ρ`. States are stored as computed, including
/// any loss of positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    fn from_states(times: &[f64], states: Vec<CMatrix>) -> Self {
        let diagnostics = states.iter().map(StepDiagnostics::of).collect();
        Self {
            times: times.to_vec(),
            states,
            diagnostics,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_trace_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| (d.trace - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.hermiticity_defect)
            .fold(0.0, f64::max)
    }

    pub fn min_lambda(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.lambda_min)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Re tr(O ρ_t)` at every sample.
    pub fn expectation(&self, observable: &CMatrix) -> Vec<f64> {
        self.states.iter().map(|r| (observable * r).trace().re).collect()
    }

    /// Largest entrywise difference against another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidTimes("no sample times".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidTimes("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimes("times must be strictly increasing".into()));
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `e^{tL} ρ` for an arbitrary matrix `ρ`.
pub fn propagate(s: &Superoperator, rho: &CMatrix, t: f64) -> CMatrix {
    if t == 0.0 {
        return rho.clone();
    }
    let prop = linalg::expm(&(s.matrix() * real(t)));
    linalg::unvec(&(prop * linalg::vec(rho)), s.dim())
}

/// `ρ_t = e^{tL} ρ₀` by scaling-and-squaring at every sample time.
pub fn evolve_exact(s: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    check_dim(s.dim(), rho0.dim())?;
    validate_times(times)?;
    let states = times
        .iter()
        .map(|&t| propagate(s, rho0.matrix(), t))
        .collect();
    Ok(Trajectory::from_states(times, states))
}

/// Adaptive Dormand–Prince integration of `ρ̇ = L ρ` using the generator's
/// direct action.
pub fn evolve_ode<L: Liouvillian + ?Sized>(
    l: &L,
    rho0: &DensityMatrix,
    times: &[f64],
    tol: OdeTolerances,
) -> Result<Trajectory> {
    let n = l.dim();
    check_dim(n, rho0.dim())?;
    validate_times(times)?;
    let rhs = |v: &CVector| linalg::vec(&l.apply(&linalg::unvec(v, n)));
    let ys = ode::integrate(&rhs, 0.0, &linalg::vec(rho0.matrix()), times, tol)?;
    let states = ys.iter().map(|v| linalg::unvec(v, n)).collect();
    Ok(Trajectory::from_states(times, states))
}

/// Frobenius norm of `e^{(t+s)L} − e^{tL} e^{sL}`.
pub fn semigroup_check(s: &Superoperator, t: f64, dt: f64) -> f64 {
    let whole = s.exp(t + dt);
    let split = s.exp(t).compose(&s.exp(dt));
    linalg::frobenius(&(whole.matrix() - split.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpSample {
    pub t: f64,
    pub min_choi_eigenvalue: f64,
    pub is_cp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpTrajectory {
    pub samples: Vec<CpSample>,
    /// First time at which `e^{tL}` stops being completely positive, refined
    /// by bisection to [`VIOLATION_TIME_RESOLUTION`].
    pub first_violation: Option<f64>,
}

impl CpTrajectory {
    pub fn all_cp(&self) -> bool {
        self.samples.iter().all(|s| s.is_cp)
    }
}

fn cp_sample(s: &Superoperator, t: f64, tol: f64) -> Result<CpSample> {
    let verdict = ChoiMatrix::from_superop(&s.exp(t)).is_completely_positive(tol)?;
    Ok(CpSample {
        t,
        min_choi_eigenvalue: verdict.min_eigenvalue,
        is_cp: verdict.is_cp,
    })
}

/// Choi-matrix verdict for `e^{tL}` at each sample time.
pub fn cp_along_trajectory(s: &Superoperator, times: &[f64], tol: f64) -> Result<CpTrajectory> {
    validate_times(times)?;
    let samples = times
        .iter()
        .map(|&t| cp_sample(s, t, tol))
        .collect::<Result<Vec<_>>>()?;
    let first_violation = match samples.iter().position(|x| !x.is_cp) {
        None => None,
        Some(idx) => {
            let mut hi = samples[idx].t;
            // e^{0·L} is the identity, which is completely positive
            let mut lo = if idx == 0 { 0.0 } else { samples[idx - 1].t };
            while hi - lo > VIOLATION_TIME_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                if cp_sample(s, mid, tol)?.is_cp {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(hi)
        }
    };
    Ok(CpTrajectory {
        samples,
        first_violation,
    })
}

/// Result of the positivity-generator search.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCheck {
    /// Smallest `⟨ψ|L(|φ⟩⟨φ|)|ψ⟩` found over orthonormal pairs.
    pub min_value: f64,
    pub phi: CVector,
    pub psi: CVector,
    /// Norm of `X ↦ tr(L X)`, the trace-sum condition.
    pub trace_sum_defect: f64,
}

impl PositivityCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_value >= -tol
    }
}

fn herm_apply(s: &Superoperator, x: &CMatrix) -> CMatrix {
    linalg::hermitian_part(&s.apply(x))
}

fn pair_value(s: &Superoperator, phi: &CVector, psi: &CVector) -> f64 {
    let b = s.apply(&(phi * phi.adjoint()));
    psi.dotc(&(b * psi)).re
}

/// Smallest eigenvector of `m` restricted to the orthogonal complement of `phi`.
fn min_on_complement(m: &CMatrix, phi: &CVector) -> (f64, CVector) {
    let n = m.nrows();
    let shift = 1e3 * (linalg::max_abs(m) * n as f64 + 1.0);
    let pinned = linalg::identity(n) - phi * phi.adjoint();
    let restricted = &pinned * m * &pinned + phi * phi.adjoint() * real(shift);
    let (vals, vecs) = linalg::eigh(&restricted);
    (vals[0], vecs.column(0).into_owned())
}

fn stiefel_descent(s: &Superoperator, dual: &Superoperator, start: CMatrix) -> (f64, CVector, CVector) {
    let n = s.dim();
    let mut x = linalg::orthonormalize_columns(&start);
    let value = |x: &CMatrix| pair_value(s, &x.column(0).into_owned(), &x.column(1).into_owned());
    let mut f = value(&x);
    let mut eta = 1.0 / (linalg::frobenius(s.matrix()) + 1e-300);
    for _ in 0..2000 {
        let phi = x.column(0).into_owned();
        let psi = x.column(1).into_owned();
        let a = herm_apply(dual, &(&psi * psi.adjoint()));
        let b = herm_apply(s, &(&phi * phi.adjoint()));
        let mut g = linalg::zeros(n, 2);
        g.set_column(0, &(a * &phi));
        g.set_column(1, &(b * &psi));
        let xg = x.adjoint() * &g;
        let z = &g - &x * linalg::hermitian_part(&xg);
        let gnorm2 = z.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if gnorm2.sqrt() < 1e-12 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial = linalg::orthonormalize_columns(&(&x - &z * real(eta)));
            let ft = value(&trial);
            // a strong sufficient-decrease constant keeps the step away from the
            // stability edge, where the iterates oscillate without contracting
            if ft <= f - 0.3 * eta * gnorm2 {
                x = trial;
                let improvement = f - ft;
                f = ft;
                eta *= 2.0;
                accepted = true;
                if improvement <= 1e-16 * f.abs().max(1.0) {
                    eta = 0.0;
                }
                break;
            }
            eta *= 0.5;
        }
        if !accepted || eta == 0.0 {
            break;
        }
    }
    // exact polish of ψ for the final φ
    let phi = x.column(0).into_owned();
    let b = herm_apply(s, &(&phi * phi.adjoint()));
    let (v, psi) = min_on_complement(&b, &phi);
    if v < f {
        (v, phi, psi)
    } else {
        (f, phi, x.column(1).into_owned())
    }
}

/// Minimizes `⟨ψ|L(|φ⟩⟨φ|)|ψ⟩` over orthonormal pairs `(φ, ψ)`.
///
/// A generator of positive maps must keep this non-negative (off-diagonal
/// entries of `tr(P_i L P_j)` for rank-one resolutions of identity; coarser
/// resolutions are sums of these). Uses multi-start Riemannian gradient
/// descent on the Stiefel manifold of pairs with Armijo backtracking; the
/// restarts are seeded deterministically from `seed`.
pub fn kossakowski_positivity_check(s: &Superoperator, restarts: usize, seed: u64) -> PositivityCheck {
    let n = s.dim();
    let dual = s.dual();
    let trace_sum_defect = s.generator_trace_defect();
    let runs: Vec<(f64, CVector, CVector)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = random::ginibre(&mut rng, n, 2);
            stiefel_descent(s, &dual, start)
        })
        .collect();
    let (min_value, phi, psi) = runs
        .into_iter()
        .reduce(|best, cur| if cur.0 < best.0 { cur } else { best })
        .expect("at least one restart");
    PositivityCheck {
        min_value,
        phi,
        psi,
        trace_sum_defect,
    }
}

/// Null space of the superoperator matrix via SVD, threshold `tol·σ_max`.
/// Kernel elements with non-negligible trace are scaled to unit trace.
pub fn steady_states(s: &Superoperator, tol: f64) -> Vec<CMatrix> {
    let n = s.dim();
    let n2 = n * n;
    let svd = s.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut out = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > tol * sigma_max && sigma_max > 0.0 {
            continue;
        }
        let v: CVector = v_t.row(i).adjoint();
        out.push(normalize_kernel_element(linalg::unvec(&v, n)));
    }
    // rank-deficient SVD of the zero matrix still yields n² rows; nothing is lost
    debug_assert!(out.len() <= n2);
    out
}

fn normalize_kernel_element(m: CMatrix) -> CMatrix {
    let tr = m.trace();
    if tr.norm() > 1e-8 * linalg::frobenius(&m) {
        linalg::hermitian_part(&(m / tr))
    } else {
        m
    }
}

/// Eigenvalues of the generator, sorted by decreasing real part then
/// increasing imaginary part.
pub fn spectral_analysis(s: &Superoperator) -> Vec<Complex64> {
    let mut ev = linalg::eigenvalues(s.matrix());
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(s: &Superoperator) -> f64 {
    spectral_analysis(s)
        .first()
        .map_or(0.0, |z| z.re)
}

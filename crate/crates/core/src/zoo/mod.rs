//! Historical master equations as concrete generators: Landau's damped
//! oscillator, optical potentials, Lamb's two-level equation and its cure,
//! the laser equation, Redfield, Davies, Belavin's form and the qubit Pauli
//! family.

pub mod bath;
pub mod davies;
pub mod redfield;

use crate::basis::OperatorBasis;
use crate::cp::KrausSet;
use crate::error::{Error, Result};
use crate::generators::{GklsVerdict, GksGenerator, LindbladGenerator, Superoperator};
use crate::linalg::{self, real};
use crate::{CMatrix, PSD_TOL};

pub use bath::{ohmic_correlation, BathTable, FnMatrix, MatrixFunction};
pub use davies::{davies_generator, DaviesBlock, DaviesGenerator, LambShift};
pub use redfield::{redfield_generator, RedfieldGenerator, RedfieldOptions};

/// Largest population allowed in the top two Fock levels before a
/// truncated computation is considered to leak.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Truncated Fock space of dimension `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpec {
    dim: usize,
}

impl FockSpec {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!(
                "Fock truncation must be at least 2, got {dim}"
            )));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `a|n⟩ = √n |n−1⟩`.
    pub fn annihilation(&self) -> CMatrix {
        let mut a = linalg::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = real((n as f64).sqrt());
        }
        a
    }

    pub fn creation(&self) -> CMatrix {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> CMatrix {
        linalg::diag(&(0..self.dim).map(|n| n as f64).collect::<Vec<_>>())
    }

    /// Population of the top two levels of `rho`.
    pub fn leakage(&self, rho: &CMatrix) -> f64 {
        (self.dim.saturating_sub(2)..self.dim)
            .map(|n| rho[(n, n)].re)
            .sum()
    }
}

fn positive_rate(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

fn non_negative_rate(name: &str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {value}")));
    }
    Ok(())
}

fn check_hermitian(what: &'static str, m: &CMatrix) -> Result<()> {
    let defect = linalg::hermiticity_defect(m);
    if defect > 1e-12 * linalg::max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { what, defect });
    }
    Ok(())
}

fn check_square(m: &CMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// Damped oscillator: `H = 0`, single jump `√γ a`.
pub fn landau_generator(fock: FockSpec, gamma: f64) -> Result<LindbladGenerator> {
    positive_rate("gamma", gamma)?;
    let d = fock.dim();
    LindbladGenerator::new(linalg::zeros(d, d), vec![fock.annihilation() * real(gamma.sqrt())])
}

/// `ρ̇ = −i[H, ρ] − (Vρ + ρV)` for an absorbing potential `V ≥ 0`.
pub fn optical_potential_generator(h: &CMatrix, v: &CMatrix) -> Result<Superoperator> {
    let n = h.nrows();
    check_square(h, n)?;
    check_square(v, n)?;
    check_hermitian("Hamiltonian", h)?;
    check_hermitian("potential", v)?;
    let min = linalg::min_eigenvalue(v);
    if min < -PSD_TOL * linalg::max_abs(v).max(1.0) {
        return Err(Error::NegativePotential { min_eigenvalue: min });
    }
    let v = linalg::hermitian_part(v);
    Ok(Superoperator::hamiltonian(h).add(&Superoperator::from_map(n, |x| {
        linalg::anticommutator(&v, x) * real(-1.0)
    })))
}

/// Parameters of Lamb's two-level equation `ρ̇ = −i[H, ρ] − ½{Γ, ρ}` with
/// `Γ = diag(γ1, γ2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambParams {
    pub hamiltonian: CMatrix,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl LambParams {
    pub fn new(hamiltonian: CMatrix, gamma1: f64, gamma2: f64) -> Result<Self> {
        check_square(&hamiltonian, 2)?;
        check_hermitian("Hamiltonian", &hamiltonian)?;
        non_negative_rate("gamma1", gamma1)?;
        non_negative_rate("gamma2", gamma2)?;
        Ok(Self {
            hamiltonian,
            gamma1,
            gamma2,
        })
    }

    pub fn gamma(&self) -> CMatrix {
        linalg::diag(&[self.gamma1, self.gamma2])
    }

    /// `e^{(−iH − Γ/2)t}`, the propagator of the amplitude.
    pub fn amplitude_propagator(&self, t: f64) -> CMatrix {
        let k = &self.hamiltonian * (-linalg::I) - self.gamma() * real(0.5);
        linalg::expm(&(k * real(t)))
    }

    /// `ρ_t = e^{(−iH − Γ/2)t} ρ₀ e^{(iH − Γ/2)t}`.
    pub fn evolve(&self, rho0: &CMatrix, t: f64) -> CMatrix {
        let p = self.amplitude_propagator(t);
        &p * rho0 * p.adjoint()
    }
}

/// Lamb's equation as a superoperator. Both decay constants must be
/// positive.
pub fn lamb_generator(p: &LambParams) -> Result<Superoperator> {
    positive_rate("gamma1", p.gamma1)?;
    positive_rate("gamma2", p.gamma2)?;
    let gamma = p.gamma();
    Ok(Superoperator::hamiltonian(&p.hamiltonian).add(&Superoperator::from_map(2, |x| {
        linalg::anticommutator(&gamma, x) * real(-0.5)
    })))
}

/// The canonical cure `K₁ = √γ1 |2⟩⟨1|`, `K₂ = √γ2 |1⟩⟨2|`, which satisfies
/// `Σ K†K = Γ`.
pub fn default_lamb_cure(p: &LambParams) -> KrausSet {
    let k1 = linalg::unit(2, 1, 0) * real(p.gamma1.sqrt());
    let k2 = linalg::unit(2, 0, 1) * real(p.gamma2.sqrt());
    KrausSet::new(2, vec![k1, k2]).expect("2x2 operators")
}

/// Adds the jump term `Φρ = Σ K ρ K†` to Lamb's equation. `Φ` must satisfy
/// `Φ*(I) = Σ K†K = Γ`; the result is then a trace-preserving GKLS
/// generator with the `K` as jump operators.
pub fn cure_lamb(p: &LambParams, cure: Option<&KrausSet>) -> Result<LindbladGenerator> {
    let default = default_lamb_cure(p);
    let cure = cure.unwrap_or(&default);
    if cure.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: cure.dim(),
        });
    }
    let defect = linalg::frobenius(&(cure.dual_identity() - p.gamma()));
    if defect > 1e-9 {
        return Err(Error::KrausMismatch { defect });
    }
    LindbladGenerator::new(p.hamiltonian.clone(), cure.ops().to_vec())
}

/// Laser-mode rates: damping `ν`, pumping `δ` and mode frequency `Ω`
/// (used for `H = Ω b†b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    pub nu: f64,
    pub delta: f64,
    pub omega: f64,
}

impl LaserParams {
    pub fn new(nu: f64, delta: f64, omega: f64) -> Result<Self> {
        non_negative_rate("delta", delta)?;
        if !(nu > delta) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "stationarity requires nu > delta >= 0, got nu = {nu}, delta = {delta}"
            )));
        }
        if !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be finite, got {omega}")));
        }
        Ok(Self { nu, delta, omega })
    }

    /// `δ = e^{−Ω/T} ν` (units with `ħ = k = 1`).
    pub fn thermal(nu: f64, omega: f64, temperature: f64) -> Result<Self> {
        positive_rate("temperature", temperature)?;
        positive_rate("omega", omega)?;
        Self::new(nu, (-omega / temperature).exp() * nu, omega)
    }

    /// Mean thermal photon number `δ / (ν − δ)`.
    pub fn thermal_photon_number(&self) -> f64 {
        self.delta / (self.nu - self.delta)
    }
}

/// Laser field: `H = Ω b†b`, jumps `√(2ν) b` and `√(2δ) b†`.
pub fn laser_generator(fock: FockSpec, p: LaserParams) -> Result<LindbladGenerator> {
    let p = LaserParams::new(p.nu, p.delta, p.omega)?;
    let b = fock.annihilation();
    let mut jumps = vec![&b * real((2.0 * p.nu).sqrt())];
    if p.delta > 0.0 {
        jumps.push(b.adjoint() * real((2.0 * p.delta).sqrt()));
    }
    LindbladGenerator::new(fock.number() * real(p.omega), jumps)
}

/// `Lρ = ½ Σ_ij γ_ij (2A_i ρ A_j† − A_j†A_i ρ − ρ A_j†A_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BelavinGenerator {
    ops: Vec<CMatrix>,
    rates: CMatrix,
    superop: Superoperator,
}

impl BelavinGenerator {
    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn rates(&self) -> &CMatrix {
        &self.rates
    }

    /// GKLS iff the rate matrix is positive semidefinite.
    pub fn is_gkls(&self, tol: f64) -> GklsVerdict {
        let min_eigenvalue = if self.rates.nrows() == 0 {
            0.0
        } else {
            linalg::min_eigenvalue(&self.rates)
        };
        GklsVerdict {
            is_gkls: min_eigenvalue >= -tol,
            min_eigenvalue,
        }
    }
}

pub fn belavin_generator(ops: &[CMatrix], rates: &CMatrix) -> Result<BelavinGenerator> {
    let k = ops.len();
    check_square(rates, k)?;
    check_hermitian("rate matrix", rates)?;
    let n = ops.first().map_or(0, |a| a.nrows());
    if n == 0 {
        return Err(Error::InvalidDimension("at least one operator is required".into()));
    }
    for a in ops {
        check_square(a, n)?;
    }
    let superop = Superoperator::from_map(n, |x| {
        let mut out = linalg::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                let g = rates[(i, j)];
                if g == linalg::ZERO {
                    continue;
                }
                let ajd = ops[j].adjoint();
                let loss = &ajd * &ops[i];
                out += (&ops[i] * x * &ajd * real(2.0) - linalg::anticommutator(&loss, x)) * (g * 0.5);
            }
        }
        out
    });
    Ok(BelavinGenerator {
        ops: ops.to_vec(),
        rates: rates.clone(),
        superop,
    })
}

/// `Lρ = Σ_k γ_k (σ_k ρ σ_k − ρ)` as a GKS generator over the Pauli/√2 basis,
/// where the stored Kossakowski matrix is `diag(2γ₁, 2γ₂, 2γ₃)`.
pub fn pauli_example_generator(gamma: [f64; 3]) -> Result<GksGenerator> {
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter(format!("rates must be finite, got {gamma:?}")));
    }
    let basis = OperatorBasis::gell_mann(2)?;
    GksGenerator::new(
        linalg::zeros(2, 2),
        linalg::diag(&[2.0 * gamma[0], 2.0 * gamma[1], 2.0 * gamma[2]]),
        basis,
    )
}

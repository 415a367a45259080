use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { what: &'static str, defect: f64 },

    #[error("{what} is not traceless (trace modulus {trace:.3e})")]
    NotTraceless { what: &'static str, trace: f64 },

    #[error("map is not Hermiticity-preserving (Choi Hermiticity defect {defect:.3e})")]
    NotHermiticityPreserving { defect: f64 },

    #[error("not completely positive: smallest eigenvalue {min_eigenvalue:.6e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error(
        "dynamical matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.6e}); \
         block-positivity alone admits no Kraus-type decomposition"
    )]
    NotPositiveDynamicalMatrix { min_eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("step size underflow at t = {t:.6e} (h = {step:.3e}); the problem looks stiff, use the exact propagator")]
    StiffIntegration { t: f64, step: f64 },

    #[error("optical potential has negative eigenvalue {min_eigenvalue:.6e}; trace could grow above one")]
    NegativePotential { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Kraus set does not satisfy sum K^dagger K = Gamma (defect {defect:.3e})")]
    KrausMismatch { defect: f64 },

    #[error("correlation function does not decay: |h(tau_max)| = {tail:.3e} exceeds {limit:.3e}")]
    NonDecayingCorrelation { tail: f64, limit: f64 },

    #[error("no spectral data at Bohr frequency {omega:.6e}")]
    MissingSpectralData { omega: f64 },

    #[error("invalid table: {0}")]
    InvalidTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

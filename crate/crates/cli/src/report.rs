//! Diagnostics report produced by `check`.

use semigroup_forge::cp::ChoiMatrix;
use semigroup_forge::semigroup::{kossakowski_positivity_check, spectral_abscissa, steady_states};
use semigroup_forge::zoo::LEAKAGE_LIMIT;
use semigroup_forge::{linalg, GksGenerator, OperatorBasis, Superoperator};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::spec::Loaded;
use crate::{CliError, CliResult, FORMAT_VERSION};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Verdict names accepted by `--require`.
pub const VERDICTS: [&str; 7] = ["trace", "hermiticity", "gkls", "cp", "positivity", "stable", "leakage"];

/// Required when `--require` is absent: the two properties every generator
/// of a trace-preserving, Hermiticity-preserving semigroup must have.
pub const DEFAULT_REQUIRED: [&str; 2] = ["trace", "hermiticity"];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub times: Vec<f64>,
    /// Restarts of the positivity optimizer.
    pub budget: usize,
    pub seed: u64,
    pub require: Vec<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: semigroup_forge::PSD_TOL,
            times: vec![0.1, 1.0],
            budget: semigroup_forge::cp::DEFAULT_RESTARTS,
            seed: crate::DEFAULT_SEED,
            require: DEFAULT_REQUIRED.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Tolerances {
    pub tol: f64,
    pub times: Vec<f64>,
    pub budget: usize,
    pub seed: u64,
    /// Relative singular-value cutoff used for the steady-state kernel.
    pub steady_state_tol: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DefectVerdict {
    pub pass: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GklsReport {
    pub pass: bool,
    /// Smallest eigenvalue of the Kossakowski matrix; `None` when the map
    /// has no GKS form because it does not preserve Hermiticity.
    pub min_eigenvalue: Option<f64>,
    /// Norm of the anticommutator residual, zero for trace-preserving maps.
    pub residual_norm: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CpSampleReport {
    pub t: f64,
    pub pass: bool,
    pub min_choi_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PositivityReport {
    pub pass: bool,
    pub min_value: f64,
    pub trace_sum_defect: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AbscissaReport {
    /// `max Re λ(L) ≤ tol`.
    pub pass: bool,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LeakageReport {
    pub pass: bool,
    /// Population of the top two Fock levels in the steady state.
    pub steady_state_leakage: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdicts {
    pub trace_preserving: DefectVerdict,
    pub hermiticity_preserving: DefectVerdict,
    pub is_gkls: GklsReport,
    pub cp_of_exp_tl: Vec<CpSampleReport>,
    pub kossakowski_positivity: PositivityReport,
    pub spectral_abscissa: AbscissaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_leakage: Option<LeakageReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiagnosticsReport {
    pub format_version: u32,
    pub tool_version: &'static str,
    pub fingerprint: String,
    pub format: String,
    pub dim: usize,
    pub tolerances: Tolerances,
    pub verdicts: Verdicts,
    pub required: Vec<String>,
    pub failed: Vec<String>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

/// SHA-256 over the dimension and the little-endian bytes of every
/// superoperator entry in column-major order.
pub fn fingerprint(s: &Superoperator) -> String {
    let mut h = Sha256::new();
    h.update((s.dim() as u64).to_le_bytes());
    for z in s.matrix().iter() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn validate(opts: &CheckOptions) -> CliResult<()> {
    if !(opts.tol >= 0.0) || !opts.tol.is_finite() {
        return Err(CliError::Input(format!("--tol must be a finite non-negative number, got {}", opts.tol)));
    }
    if let Some(t) = opts.times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(CliError::Input(format!("--times entries must be finite and >= 0, got {t}")));
    }
    if opts.budget == 0 {
        return Err(CliError::Input("--budget must be at least 1".into()));
    }
    for r in opts.require.iter().filter(|r| !r.is_empty()) {
        if r != "all" && !VERDICTS.contains(&r.as_str()) {
            return Err(CliError::Input(format!(
                "unknown verdict `{r}` in --require (known: all, {})",
                VERDICTS.join(", ")
            )));
        }
    }
    Ok(())
}

const STEADY_STATE_TOL: f64 = 1e-9;

pub fn check(l: &Loaded, opts: &CheckOptions) -> CliResult<DiagnosticsReport> {
    validate(opts)?;
    let s = &l.superop;
    let n = l.dim();
    let tol = opts.tol;

    let trace_defect = s.generator_trace_defect();
    let herm_defect = s.hermiticity_defect();
    let is_gkls = match GksGenerator::from_superop(s, &OperatorBasis::gell_mann(n)?) {
        Ok(d) => {
            let v = d.generator.is_gkls(tol);
            GklsReport {
                pass: v.is_gkls,
                min_eigenvalue: Some(v.min_eigenvalue),
                residual_norm: Some(linalg::frobenius(&d.residual)),
            }
        }
        Err(_) => GklsReport {
            pass: false,
            min_eigenvalue: None,
            residual_norm: None,
        },
    };
    let cp_of_exp_tl = opts
        .times
        .iter()
        .map(|&t| -> CliResult<CpSampleReport> {
            let v = ChoiMatrix::from_superop(&s.exp(t)).is_completely_positive(tol)?;
            Ok(CpSampleReport {
                t,
                pass: v.is_cp,
                min_choi_eigenvalue: v.min_eigenvalue,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let pc = kossakowski_positivity_check(s, opts.budget, opts.seed);
    let abscissa = spectral_abscissa(s);
    let fock_leakage = match l.fock {
        Some(f) => {
            let ss = steady_states(s, STEADY_STATE_TOL);
            let leak = ss.iter().map(|r| f.leakage(r)).fold(0.0, f64::max);
            Some(LeakageReport {
                pass: !ss.is_empty() && leak <= LEAKAGE_LIMIT,
                steady_state_leakage: leak,
                limit: LEAKAGE_LIMIT,
            })
        }
        None => None,
    };

    let verdicts = Verdicts {
        trace_preserving: DefectVerdict {
            pass: trace_defect <= tol,
            defect: trace_defect,
        },
        hermiticity_preserving: DefectVerdict {
            pass: herm_defect <= tol,
            defect: herm_defect,
        },
        is_gkls,
        cp_of_exp_tl,
        kossakowski_positivity: PositivityReport {
            pass: pc.passes(tol),
            min_value: pc.min_value,
            trace_sum_defect: pc.trace_sum_defect,
        },
        spectral_abscissa: AbscissaReport {
            pass: abscissa <= tol,
            value: abscissa,
        },
        fock_leakage,
    };

    let required: Vec<String> = if opts.require.iter().any(|r| r == "all") {
        VERDICTS.iter().map(|s| s.to_string()).collect()
    } else {
        let mut r: Vec<String> = Vec::new();
        for name in opts.require.iter().filter(|r| !r.is_empty()) {
            if !r.contains(name) {
                r.push(name.clone());
            }
        }
        r
    };
    let failed = required
        .iter()
        .filter(|name| !verdict_passes(&verdicts, name))
        .cloned()
        .collect();

    Ok(DiagnosticsReport {
        format_version: FORMAT_VERSION,
        tool_version: TOOL_VERSION,
        fingerprint: fingerprint(s),
        format: l.format.clone(),
        dim: n,
        tolerances: Tolerances {
            tol,
            times: opts.times.clone(),
            budget: opts.budget,
            seed: opts.seed,
            steady_state_tol: STEADY_STATE_TOL,
        },
        verdicts,
        required,
        failed,
    })
}

fn verdict_passes(v: &Verdicts, name: &str) -> bool {
    match name {
        "trace" => v.trace_preserving.pass,
        "hermiticity" => v.hermiticity_preserving.pass,
        "gkls" => v.is_gkls.pass,
        "cp" => v.cp_of_exp_tl.iter().all(|s| s.pass),
        "positivity" => v.kossakowski_positivity.pass,
        "stable" => v.spectral_abscissa.pass,
        // only meaningful on a Fock space; vacuous elsewhere
        "leakage" => v.fock_leakage.as_ref().is_none_or(|l| l.pass),
        _ => false,
    }
}

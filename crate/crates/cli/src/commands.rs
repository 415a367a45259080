//! Subcommand implementations. Each returns the text for stdout and the
//! exit code so they can be driven from tests without a process.

use std::path::Path;

use semigroup_forge::cp::ChoiMatrix;
use semigroup_forge::semigroup::{evolve_exact, evolve_ode, OdeTolerances};
use semigroup_forge::zoo::LEAKAGE_LIMIT;
use semigroup_forge::{DensityMatrix, Error, GksGenerator, OperatorBasis, EIG_CUTOFF};
use serde::Serialize;

use crate::json::{self, from_matrix, JsonMatrix, StateFile};
use crate::report::{self, CheckOptions};
use crate::spec::{self, Loaded, SpecFile};
use crate::{trajectory_csv, CliError, CliResult, FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: 0,
        }
    }
}

/// Runs all diagnostics; exit code 2 if any required verdict fails.
pub fn check(spec_path: &Path, opts: &CheckOptions) -> CliResult<Output> {
    let l = spec::load_path(spec_path)?;
    let r = report::check(&l, opts)?;
    let code = if r.passed() { 0 } else { 2 };
    let stderr = if r.passed() {
        String::new()
    } else {
        format!("failed verdicts: {}\n", r.failed.join(", "))
    };
    Ok(Output {
        stdout: json::to_pretty(&r),
        stderr,
        code,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        let tol = OdeTolerances::default();
        Self {
            t0: 0.0,
            t1: 1.0,
            steps: 10,
            method: Method::Exact,
            rtol: tol.rtol,
            atol: tol.atol,
        }
    }
}

/// Trace tolerance for input states.
pub const STATE_TRACE_TOL: f64 = 1e-8;

/// `steps + 1` equally spaced times from `t0` to `t1`, or just `t0` when the
/// interval is empty.
pub fn time_grid(opts: &EvolveOptions) -> CliResult<Vec<f64>> {
    let EvolveOptions { t0, t1, steps, .. } = *opts;
    if !(t0 >= 0.0) || !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(CliError::Input(format!("need 0 <= t0 <= t1, got t0 = {t0}, t1 = {t1}")));
    }
    if steps == 0 || t1 == t0 {
        return Ok(vec![t0]);
    }
    Ok((0..=steps).map(|k| t0 + (t1 - t0) * k as f64 / steps as f64).collect())
}

pub fn load_state(path: &Path) -> CliResult<DensityMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let s: StateFile = json::parse(&text, "state")?;
    json::check_version(s.format_version, "state")?;
    let rho = json::to_matrix(&s.rho, "rho")?;
    DensityMatrix::with_tolerance(rho, STATE_TRACE_TOL).map_err(|e| CliError::Input(format!("state: {e}")))
}

pub fn evolve(spec_path: &Path, state_path: &Path, opts: &EvolveOptions) -> CliResult<Output> {
    let l = spec::load_path(spec_path)?;
    let rho = load_state(state_path)?;
    if rho.dim() != l.dim() {
        return Err(CliError::Input(format!(
            "dimension mismatch: state is {0}x{0}, generator acts on {1}x{1}",
            rho.dim(),
            l.dim()
        )));
    }
    let times = time_grid(opts)?;
    let traj = match opts.method {
        Method::Exact => evolve_exact(&l.superop, &rho, &times)?,
        Method::Ode => {
            let tol = OdeTolerances {
                rtol: opts.rtol,
                atol: opts.atol,
            };
            evolve_ode(&*l.liouvillian, &rho, &times, tol)?
        }
    };
    let mut stderr = String::new();
    if let Some(f) = l.fock {
        let worst = traj.states.iter().map(|r| f.leakage(r)).fold(0.0, f64::max);
        if worst > LEAKAGE_LIMIT {
            stderr = format!(
                "warning: population of the top two Fock levels reaches {worst:.3e} (limit {LEAKAGE_LIMIT:.0e}); increase d\n"
            );
        }
    }
    Ok(Output {
        stdout: trajectory_csv::write(&traj),
        stderr,
        code: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Gks,
    Lindblad,
    Kraus(f64),
    Choi(f64),
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let timed = |rest: &str| -> Result<f64, String> {
            let t: f64 = rest.parse().map_err(|e| format!("bad time `{rest}`: {e}"))?;
            if !(t >= 0.0) || !t.is_finite() {
                return Err(format!("time must be finite and >= 0, got {t}"));
            }
            Ok(t)
        };
        match s {
            "gks" => Ok(Target::Gks),
            "lindblad" => Ok(Target::Lindblad),
            _ => match s.split_once('@') {
                Some(("kraus", t)) => Ok(Target::Kraus(timed(t)?)),
                Some(("choi", t)) => Ok(Target::Choi(timed(t)?)),
                _ => Err(format!("unknown target `{s}` (expected gks, lindblad, kraus@t or choi@t)")),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct KrausFile {
    pub format_version: u32,
    pub kind: String,
    pub t: f64,
    pub dim: usize,
    pub trace_preservation_defect: f64,
    pub ops: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ChoiFile {
    pub format_version: u32,
    pub kind: String,
    pub t: f64,
    pub dim: usize,
    pub min_eigenvalue: f64,
    pub matrix: JsonMatrix,
}

/// Residual norm above which a generator is treated as not trace-preserving
/// and therefore without GKS or Lindblad form.
pub const RESIDUAL_TOL: f64 = 1e-9;

fn gks_form(l: &Loaded) -> CliResult<GksGenerator> {
    let d = GksGenerator::from_superop(&l.superop, &OperatorBasis::gell_mann(l.dim())?)
        .map_err(|e| CliError::Verdict(e.to_string()))?;
    let residual = semigroup_forge::linalg::frobenius(&d.residual);
    if residual > RESIDUAL_TOL {
        return Err(CliError::Verdict(format!(
            "generator is not trace-preserving (anticommutator residual {residual:.3e}); it has no GKS form"
        )));
    }
    Ok(d.generator)
}

pub fn convert(spec_path: &Path, target: Target) -> CliResult<Output> {
    let l = spec::load_path(spec_path)?;
    convert_loaded(&l, target)
}

pub fn convert_loaded(l: &Loaded, target: Target) -> CliResult<Output> {
    let text = match target {
        Target::Gks => json::to_pretty(&SpecFile::gks(&gks_form(l)?)),
        Target::Lindblad => {
            let g = gks_form(l)?.to_lindblad().map_err(|e| match e {
                Error::NotCompletelyPositive { min_eigenvalue } => CliError::Verdict(format!(
                    "Kossakowski matrix is not positive semidefinite: eigenvalue {min_eigenvalue}"
                )),
                other => CliError::Verdict(other.to_string()),
            })?;
            json::to_pretty(&SpecFile::lindblad(&g))
        }
        Target::Kraus(t) => {
            let choi = ChoiMatrix::from_superop(&l.superop.exp(t));
            let k = choi.kraus(EIG_CUTOFF).map_err(|e| match e {
                Error::NotCompletelyPositive { min_eigenvalue } => CliError::Verdict(format!(
                    "e^(tL) at t = {t} is not completely positive: Choi eigenvalue {min_eigenvalue}"
                )),
                other => CliError::Verdict(other.to_string()),
            })?;
            json::to_pretty(&KrausFile {
                format_version: FORMAT_VERSION,
                kind: "kraus".into(),
                t,
                dim: l.dim(),
                trace_preservation_defect: k.trace_preservation_defect(),
                ops: k.ops().iter().map(from_matrix).collect(),
            })
        }
        Target::Choi(t) => {
            let choi = ChoiMatrix::from_superop(&l.superop.exp(t));
            json::to_pretty(&ChoiFile {
                format_version: FORMAT_VERSION,
                kind: "choi".into(),
                t,
                dim: l.dim(),
                min_eigenvalue: semigroup_forge::linalg::min_eigenvalue(choi.matrix()),
                matrix: from_matrix(choi.matrix()),
            })
        }
    };
    Ok(Output::ok(text))
}

pub fn zoo_list() -> Output {
    let mut s = String::new();
    for name in spec::ZOO_NAMES {
        s.push_str(name);
        s.push('\n');
    }
    Output::ok(s)
}

pub fn zoo_emit(name: &str) -> CliResult<Output> {
    Ok(Output::ok(json::to_pretty(&spec::example(name)?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_rules() {
        let mut o = EvolveOptions {
            t0: 0.0,
            t1: 0.0,
            ..Default::default()
        };
        assert_eq!(time_grid(&o).unwrap(), vec![0.0]);
        o.t1 = 1.0;
        o.steps = 4;
        assert_eq!(time_grid(&o).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        o.t0 = 2.0;
        assert!(time_grid(&o).is_err());
    }

    #[test]
    fn target_parsing() {
        assert_eq!("gks".parse::<Target>().unwrap(), Target::Gks);
        assert_eq!("kraus@0.5".parse::<Target>().unwrap(), Target::Kraus(0.5));
        assert_eq!("choi@2".parse::<Target>().unwrap(), Target::Choi(2.0));
        assert!("kraus@-1".parse::<Target>().is_err());
        assert!("kraus".parse::<Target>().is_err());
        assert!("superop".parse::<Target>().is_err());
    }

    #[test]
    fn lindblad_of_non_psd_reports_eigenvalue() {
        let l = spec::load(&spec::example("pauli").unwrap(), Path::new(".")).unwrap();
        match convert_loaded(&l, Target::Lindblad) {
            Err(CliError::Verdict(m)) => assert!(m.contains("-2.0"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lamb_has_no_gks_form() {
        let l = spec::load(&spec::example("lamb").unwrap(), Path::new(".")).unwrap();
        assert!(matches!(convert_loaded(&l, Target::Gks), Err(CliError::Verdict(_))));
        assert!(convert_loaded(&l, Target::Choi(0.5)).is_ok());
    }
}

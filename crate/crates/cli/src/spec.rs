//! Generator specification files.
//!
//! ```json
//! { "format_version": 1, "format": "lindblad", "dim": 2,
//!   "hamiltonian": [[[0,0],[0,0]],[[0,0],[0,0]]],
//!   "jumps": [ [[[0,0],[1,0]],[[0,0],[0,0]]] ] }
//! ```
//!
//! `format` is `gks` (with `hamiltonian` and `kossakowski` over the
//! normalized Gell-Mann basis), `lindblad` (with `hamiltonian` and `jumps`)
//! or `zoo:<name>` with a `params` object. Relative file names inside
//! `params` resolve against the directory of the spec file.

use std::path::{Path, PathBuf};

use semigroup_forge::generators::Liouvillian;
use semigroup_forge::linalg::{self, real};
use semigroup_forge::zoo::{self, BathTable, FnMatrix, FockSpec, LambParams, LambShift, LaserParams, RedfieldOptions};
use semigroup_forge::{CMatrix, GksGenerator, KrausSet, LindbladGenerator, OperatorBasis, Superoperator};
use serde::{Deserialize, Serialize};

use crate::json::{self, from_matrix, to_matrix, to_square, JsonMatrix};
use crate::{CliError, CliResult, FORMAT_VERSION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub format_version: u32,
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kossakowski: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
}

impl SpecFile {
    pub fn gks(g: &GksGenerator) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            format: "gks".into(),
            dim: Some(g.hamiltonian().nrows()),
            hamiltonian: Some(from_matrix(g.hamiltonian())),
            kossakowski: Some(from_matrix(g.kossakowski())),
            jumps: None,
            params: None,
        }
    }

    pub fn lindblad(g: &LindbladGenerator) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            format: "lindblad".into(),
            dim: Some(g.hamiltonian().nrows()),
            hamiltonian: Some(from_matrix(g.hamiltonian())),
            kossakowski: None,
            jumps: Some(g.jumps().iter().map(from_matrix).collect()),
            params: None,
        }
    }

    pub fn zoo(name: &str, params: serde_json::Value) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            format: format!("zoo:{name}"),
            dim: None,
            hamiltonian: None,
            kossakowski: None,
            jumps: None,
            params: Some(params),
        }
    }
}

/// Names accepted after `zoo:`.
pub const ZOO_NAMES: [&str; 9] = [
    "landau",
    "laser",
    "optical_potential",
    "lamb",
    "cured_lamb",
    "redfield",
    "davies",
    "belavin",
    "pauli",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandauParams {
    pub d: usize,
    pub gamma: f64,
}

/// Give either `delta` or `temperature`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSpec {
    pub d: usize,
    pub nu: f64,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalParams {
    pub hamiltonian: JsonMatrix,
    pub potential: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambSpec {
    pub hamiltonian: JsonMatrix,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Only for `cured_lamb`: explicit Kraus operators of the added map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
}

/// Ohmic bath `J(ω) = ηω e^{−ω/ωc}` at temperature `T`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ohmic {
    pub eta: f64,
    pub omega_c: f64,
    pub temperature: f64,
}

/// Correlation function `h(τ)` for Redfield.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSource {
    /// Text table file.
    Table(String),
    /// Ohmic correlation tabulated on `points` uniform nodes of `[0, tau_max]`.
    Ohmic(OhmicTable),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmicTable {
    pub eta: f64,
    pub omega_c: f64,
    pub temperature: f64,
    pub tau_max: f64,
    pub points: usize,
}

impl OhmicTable {
    pub fn bath(&self) -> Ohmic {
        Ohmic {
            eta: self.eta,
            omega_c: self.omega_c,
            temperature: self.temperature,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedfieldSpec {
    pub hamiltonian: JsonMatrix,
    pub couplings: Vec<JsonMatrix>,
    pub bath: BathSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
}

/// Spectral function `ĥ(ω)` for Davies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSource {
    Table(String),
    /// `ĥ(ω) = 2ηω e^{−|ω|/ωc} / (1 − e^{−ω/T})`, which satisfies
    /// `ĥ(ω) = e^{ω/T} ĥ(−ω)`.
    Ohmic(Ohmic),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LambSource {
    #[default]
    Zero,
    /// Principal-value integral of a tabulated spectrum.
    PrincipalValue,
    Table(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaviesSpec {
    pub hamiltonian: JsonMatrix,
    pub couplings: Vec<JsonMatrix>,
    pub spectrum: SpectrumSource,
    #[serde(default)]
    pub lamb_shift: LambSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BelavinSpec {
    pub ops: Vec<JsonMatrix>,
    pub rates: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliSpec {
    pub gamma: [f64; 3],
}

/// A parsed generator, ready for checks and evolution.
pub struct Loaded {
    pub format: String,
    pub superop: Superoperator,
    /// Structured form for matrix-free application in the ODE path.
    pub liouvillian: Box<dyn Liouvillian>,
    /// Set for generators on a truncated Fock space.
    pub fock: Option<FockSpec>,
}

impl Loaded {
    fn new(format: &str, l: Box<dyn Liouvillian>, fock: Option<FockSpec>) -> Self {
        Self {
            format: format.to_string(),
            superop: l.superoperator(),
            liouvillian: l,
            fock,
        }
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }
}

pub fn load_path(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    load_str(&text, &base)
}

pub fn load_str(text: &str, base: &Path) -> CliResult<Loaded> {
    let spec: SpecFile = json::parse(text, "generator spec")?;
    load(&spec, base)
}

fn require<'a, T>(field: &'a Option<T>, name: &str, format: &str) -> CliResult<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("format {format} requires field `{name}`")))
}

fn forbid<T>(field: &Option<T>, name: &str, format: &str) -> CliResult<()> {
    if field.is_some() {
        return Err(CliError::Input(format!("field `{name}` is not used by format {format}")));
    }
    Ok(())
}

fn params<T: for<'de> Deserialize<'de>>(spec: &SpecFile, name: &str) -> CliResult<T> {
    let value = require(&spec.params, "params", &spec.format)?;
    serde_json::from_value(value.clone())
        .map_err(|e| CliError::Input(format!("params of zoo:{name}: {e}")))
}

fn square_dim(m: &JsonMatrix, what: &str) -> CliResult<CMatrix> {
    let out = to_matrix(m, what)?;
    if out.nrows() != out.ncols() {
        return Err(CliError::Input(format!("{what}: not square ({}x{})", out.nrows(), out.ncols())));
    }
    if out.nrows() < 2 {
        return Err(CliError::Input(format!("{what}: dimension must be at least 2")));
    }
    Ok(out)
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_table(base: &Path, file: &str) -> CliResult<BathTable> {
    let path = resolve(base, file);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    BathTable::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Tabulates the Ohmic correlation function on a uniform grid.
pub fn ohmic_table(bath: Ohmic, tau_max: f64, points: usize) -> CliResult<BathTable> {
    if points < 2 || !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(CliError::Input(format!(
            "ohmic bath needs points >= 2 and finite tau_max > 0, got {points} and {tau_max}"
        )));
    }
    let grid: Vec<f64> = (0..points).map(|k| tau_max * k as f64 / (points - 1) as f64).collect();
    let mut values = Vec::with_capacity(points);
    for &t in &grid {
        let h = zoo::ohmic_correlation(bath.eta, bath.omega_c, bath.temperature, t)?;
        values.push(CMatrix::from_element(1, 1, h));
    }
    Ok(BathTable::new(grid, values)?)
}

pub fn ohmic_spectrum(bath: Ohmic, w: f64) -> f64 {
    let Ohmic {
        eta,
        omega_c,
        temperature,
    } = bath;
    let cutoff = (-w.abs() / omega_c).exp();
    if w.abs() < 1e-12 * temperature {
        2.0 * eta * temperature * cutoff
    } else {
        2.0 * eta * w * cutoff / -(-w / temperature).exp_m1()
    }
}

fn check_dim(spec: &SpecFile, loaded: Loaded) -> CliResult<Loaded> {
    if let Some(d) = spec.dim {
        if d != loaded.dim() {
            return Err(CliError::Input(format!(
                "dimension mismatch: dim is {d} but the matrices are {}x{}",
                loaded.dim(),
                loaded.dim()
            )));
        }
    }
    Ok(loaded)
}

pub fn load(spec: &SpecFile, base: &Path) -> CliResult<Loaded> {
    json::check_version(spec.format_version, "generator spec")?;
    let f = spec.format.as_str();
    let loaded = match f {
        "gks" => {
            forbid(&spec.jumps, "jumps", f)?;
            forbid(&spec.params, "params", f)?;
            let h = square_dim(require(&spec.hamiltonian, "hamiltonian", f)?, "hamiltonian")?;
            let n = h.nrows();
            let c = to_square(require(&spec.kossakowski, "kossakowski", f)?, n * n - 1, "kossakowski")?;
            let g = GksGenerator::new(h, c, OperatorBasis::gell_mann(n)?)?;
            Loaded::new(f, Box::new(g), None)
        }
        "lindblad" => {
            forbid(&spec.kossakowski, "kossakowski", f)?;
            forbid(&spec.params, "params", f)?;
            let h = square_dim(require(&spec.hamiltonian, "hamiltonian", f)?, "hamiltonian")?;
            let n = h.nrows();
            let jumps = require(&spec.jumps, "jumps", f)?
                .iter()
                .enumerate()
                .map(|(k, j)| to_square(j, n, &format!("jumps[{k}]")))
                .collect::<CliResult<Vec<_>>>()?;
            Loaded::new(f, Box::new(LindbladGenerator::new(h, jumps)?), None)
        }
        _ => {
            let name = f
                .strip_prefix("zoo:")
                .ok_or_else(|| CliError::Input(format!("unknown format `{f}` (expected gks, lindblad or zoo:<name>)")))?;
            forbid(&spec.hamiltonian, "hamiltonian", f)?;
            forbid(&spec.kossakowski, "kossakowski", f)?;
            forbid(&spec.jumps, "jumps", f)?;
            load_zoo(spec, name, base)?
        }
    };
    check_dim(spec, loaded)
}

fn load_zoo(spec: &SpecFile, name: &str, base: &Path) -> CliResult<Loaded> {
    let f = spec.format.as_str();
    Ok(match name {
        "landau" => {
            let p: LandauParams = params(spec, name)?;
            let fock = FockSpec::new(p.d)?;
            Loaded::new(f, Box::new(zoo::landau_generator(fock, p.gamma)?), Some(fock))
        }
        "laser" => {
            let p: LaserSpec = params(spec, name)?;
            let fock = FockSpec::new(p.d)?;
            let lp = match (p.delta, p.temperature) {
                (Some(delta), None) => LaserParams::new(p.nu, delta, p.omega)?,
                (None, Some(t)) => LaserParams::thermal(p.nu, p.omega, t)?,
                _ => {
                    return Err(CliError::Input(
                        "params of zoo:laser: give exactly one of `delta` and `temperature`".into(),
                    ))
                }
            };
            Loaded::new(f, Box::new(zoo::laser_generator(fock, lp)?), Some(fock))
        }
        "optical_potential" => {
            let p: OpticalParams = params(spec, name)?;
            let h = square_dim(&p.hamiltonian, "hamiltonian")?;
            let v = to_square(&p.potential, h.nrows(), "potential")?;
            Loaded::new(f, Box::new(zoo::optical_potential_generator(&h, &v)?), None)
        }
        "lamb" | "cured_lamb" => {
            let p: LambSpec = params(spec, name)?;
            let lp = LambParams::new(to_square(&p.hamiltonian, 2, "hamiltonian")?, p.gamma1, p.gamma2)?;
            if name == "lamb" {
                if p.kraus.is_some() {
                    return Err(CliError::Input("params of zoo:lamb: `kraus` is only used by zoo:cured_lamb".into()));
                }
                Loaded::new(f, Box::new(zoo::lamb_generator(&lp)?), None)
            } else {
                let cure = match &p.kraus {
                    Some(ops) => Some(KrausSet::new(
                        2,
                        ops.iter()
                            .enumerate()
                            .map(|(k, m)| to_square(m, 2, &format!("kraus[{k}]")))
                            .collect::<CliResult<Vec<_>>>()?,
                    )?),
                    None => None,
                };
                Loaded::new(f, Box::new(zoo::cure_lamb(&lp, cure.as_ref())?), None)
            }
        }
        "redfield" => {
            let p: RedfieldSpec = params(spec, name)?;
            let h = square_dim(&p.hamiltonian, "hamiltonian")?;
            let couplings = couplings(&p.couplings, h.nrows())?;
            let table = match &p.bath {
                BathSource::Table(file) => read_table(base, file)?,
                BathSource::Ohmic(o) => ohmic_table(o.bath(), o.tau_max, o.points)?,
            };
            let defaults = RedfieldOptions::default();
            let opts = RedfieldOptions {
                tau_max: p.tau_max,
                quad_tol: p.quad_tol.unwrap_or(defaults.quad_tol),
                tail_tol: p.tail_tol.unwrap_or(defaults.tail_tol),
            };
            Loaded::new(f, Box::new(zoo::redfield_generator(&h, &couplings, &table, opts)?), None)
        }
        "davies" => {
            let p: DaviesSpec = params(spec, name)?;
            let h = square_dim(&p.hamiltonian, "hamiltonian")?;
            let couplings = couplings(&p.couplings, h.nrows())?;
            let lamb_table = match &p.lamb_shift {
                LambSource::Table(file) => Some(read_table(base, file)?),
                _ => None,
            };
            let lamb = || match (&p.lamb_shift, &lamb_table) {
                (LambSource::Zero, _) => LambShift::Zero,
                (LambSource::PrincipalValue, _) => LambShift::PrincipalValue { tol: 1e-10 },
                (LambSource::Table(_), Some(t)) => LambShift::Supplied(t),
                (LambSource::Table(_), None) => unreachable!("table loaded above"),
            };
            let g = match &p.spectrum {
                SpectrumSource::Table(file) => {
                    let t = read_table(base, file)?;
                    zoo::davies_generator(&h, &couplings, &t, lamb())?
                }
                SpectrumSource::Ohmic(bath) => {
                    if matches!(p.lamb_shift, LambSource::PrincipalValue) {
                        return Err(CliError::Input(
                            "params of zoo:davies: principal_value needs a tabulated spectrum".into(),
                        ));
                    }
                    let bath = *bath;
                    let m = couplings.len();
                    let s = FnMatrix::new(m, move |w: f64| Some(linalg::identity(m) * real(ohmic_spectrum(bath, w))));
                    zoo::davies_generator(&h, &couplings, &s, lamb())?
                }
            };
            Loaded::new(f, Box::new(g), None)
        }
        "belavin" => {
            let p: BelavinSpec = params(spec, name)?;
            let first = p.ops.first().ok_or_else(|| CliError::Input("params of zoo:belavin: `ops` is empty".into()))?;
            let n = square_dim(first, "ops[0]")?.nrows();
            let ops = couplings(&p.ops, n)?;
            let rates = to_square(&p.rates, ops.len(), "rates")?;
            let b = zoo::belavin_generator(&ops, &rates)?;
            Loaded::new(f, Box::new(b.superoperator().clone()), None)
        }
        "pauli" => {
            let p: PauliSpec = params(spec, name)?;
            Loaded::new(f, Box::new(zoo::pauli_example_generator(p.gamma)?), None)
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown zoo generator `{other}` (known: {})",
                ZOO_NAMES.join(", ")
            )))
        }
    })
}

fn couplings(ms: &[JsonMatrix], n: usize) -> CliResult<Vec<CMatrix>> {
    ms.iter()
        .enumerate()
        .map(|(k, m)| to_square(m, n, &format!("operator {k}")))
        .collect()
}

/// An example spec for each zoo generator, as printed by `zoo emit`.
pub fn example(name: &str) -> CliResult<SpecFile> {
    let sx = from_matrix(&linalg::pauli_x());
    let half_sz = from_matrix(&(linalg::pauli_z() * real(0.5)));
    let value = match name {
        "landau" => serde_json::to_value(LandauParams { d: 8, gamma: 1.0 }),
        "laser" => serde_json::to_value(LaserSpec {
            d: 16,
            nu: 1.0,
            omega: 1.0,
            delta: Some(0.2),
            temperature: None,
        }),
        "optical_potential" => serde_json::to_value(OpticalParams {
            hamiltonian: sx.clone(),
            potential: from_matrix(&linalg::diag(&[0.1, 0.5])),
        }),
        "lamb" | "cured_lamb" => serde_json::to_value(LambSpec {
            hamiltonian: sx.clone(),
            gamma1: 0.5,
            gamma2: 1.0,
            kraus: None,
        }),
        "redfield" => serde_json::to_value(RedfieldSpec {
            hamiltonian: half_sz.clone(),
            couplings: vec![sx.clone()],
            bath: BathSource::Ohmic(OhmicTable {
                eta: 0.05,
                omega_c: 5.0,
                temperature: 0.5,
                tau_max: 30.0,
                points: 3001,
            }),
            tau_max: None,
            quad_tol: None,
            tail_tol: Some(1e-4),
        }),
        "davies" => serde_json::to_value(DaviesSpec {
            hamiltonian: half_sz.clone(),
            couplings: vec![sx.clone()],
            spectrum: SpectrumSource::Ohmic(Ohmic {
                eta: 0.05,
                omega_c: 5.0,
                temperature: 0.5,
            }),
            lamb_shift: LambSource::Zero,
        }),
        "belavin" => serde_json::to_value(BelavinSpec {
            ops: linalg::paulis().iter().map(from_matrix).collect(),
            rates: from_matrix(&linalg::diag(&[1.0, 1.0, -1.0])),
        }),
        "pauli" => serde_json::to_value(PauliSpec { gamma: [1.0, 1.0, -1.0] }),
        other => {
            return Err(CliError::Input(format!(
                "unknown zoo generator `{other}` (known: {})",
                ZOO_NAMES.join(", ")
            )))
        }
    }
    .expect("plain data serializes");
    Ok(SpecFile::zoo(name, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_example_loads() {
        for name in ZOO_NAMES {
            let spec = example(name).unwrap();
            let text = json::to_pretty(&spec);
            let l = load_str(&text, Path::new(".")).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(l.format, format!("zoo:{name}"));
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut spec = example("pauli").unwrap();
        spec.dim = Some(3);
        assert!(matches!(load(&spec, Path::new(".")), Err(CliError::Input(m)) if m.contains("dimension mismatch")));
    }

    #[test]
    fn missing_and_stray_fields_rejected() {
        let g = zoo::pauli_example_generator([1.0, 1.0, 1.0]).unwrap();
        let mut spec = SpecFile::gks(&g);
        spec.kossakowski = None;
        assert!(load(&spec, Path::new(".")).is_err());
        let mut spec = SpecFile::gks(&g);
        spec.jumps = Some(vec![]);
        assert!(load(&spec, Path::new(".")).is_err());
        assert!(load_str("{\"format_version\":1,\"format\":\"zoo:nope\",\"params\":{}}", Path::new(".")).is_err());
        assert!(load_str("{\"format_version\":2,\"format\":\"gks\"}", Path::new(".")).is_err());
    }

    #[test]
    fn laser_needs_exactly_one_of_delta_and_temperature() {
        let both = serde_json::json!({"d": 4, "nu": 1.0, "omega": 1.0, "delta": 0.1, "temperature": 1.0});
        assert!(load(&SpecFile::zoo("laser", both), Path::new(".")).is_err());
        let thermal = serde_json::json!({"d": 4, "nu": 1.0, "omega": 1.0, "temperature": 1.0});
        assert!(load(&SpecFile::zoo("laser", thermal), Path::new(".")).is_ok());
    }

    #[test]
    fn ohmic_spectrum_satisfies_detailed_balance() {
        let b = Ohmic {
            eta: 0.2,
            omega_c: 3.0,
            temperature: 0.6,
        };
        for &w in &[0.1, 0.9, 2.5] {
            let ratio = ohmic_spectrum(b, w) / ohmic_spectrum(b, -w);
            assert!((ratio - (w / 0.6f64).exp()).abs() < 1e-12 * ratio);
        }
        assert!((ohmic_spectrum(b, 1e-9) - ohmic_spectrum(b, 0.0)).abs() < 1e-8);
    }
}

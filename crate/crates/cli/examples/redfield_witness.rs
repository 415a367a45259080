//! Regenerates the Redfield positivity-violation golden files in
//! `tests/golden/`: a qubit coupled through σx to a tabulated Ohmic bath,
//! and the pure initial state and time at which `λ_min(ρ_t)` is most
//! negative over a seeded random search.
//!
//! cargo run -p semigroup-forge-cli --example redfield_witness

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semigroup_forge::linalg::{self, real};
use semigroup_forge::random;
use semigroup_forge::semigroup::propagate;
use semigroup_forge_cli::json::{self, from_matrix, StateFile};
use semigroup_forge_cli::spec::{self, BathSource, Ohmic, RedfieldSpec, SpecFile};
use serde::Serialize;

const SEED: u64 = 20_240_611;
const STATES: usize = 100;
const T_MAX: f64 = 4.0;
const T_STEPS: usize = 80;

#[derive(Serialize)]
struct Search {
    seed: u64,
    states: usize,
    t_max: f64,
    t_steps: usize,
}

#[derive(Serialize)]
struct Witness {
    format_version: u32,
    spec: &'static str,
    state: &'static str,
    t: f64,
    lambda_min: f64,
    search: Search,
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    std::fs::create_dir_all(&dir).expect("golden directory");

    let bath = Ohmic {
        eta: 0.25,
        omega_c: 5.0,
        temperature: 0.1,
    };
    let table = spec::ohmic_table(bath, 30.0, 3001).expect("ohmic table");
    std::fs::write(dir.join("redfield_bath.txt"), table.to_text()).expect("write table");

    let params = RedfieldSpec {
        hamiltonian: from_matrix(&(linalg::pauli_z() * real(0.5))),
        couplings: vec![from_matrix(&linalg::pauli_x())],
        bath: BathSource::Table("redfield_bath.txt".into()),
        tau_max: None,
        quad_tol: None,
        tail_tol: Some(1e-4),
    };
    let spec_file = SpecFile::zoo("redfield", serde_json::to_value(params).expect("params"));
    let spec_path = dir.join("redfield_spec.json");
    std::fs::write(&spec_path, json::to_pretty(&spec_file)).expect("write spec");
    let loaded = spec::load_path(&spec_path).expect("golden spec loads");

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut best = (f64::INFINITY, 0.0, linalg::zeros(2, 2));
    for _ in 0..STATES {
        let rho0 = random::pure_state(&mut rng, 2).into_matrix();
        for k in 1..=T_STEPS {
            let t = T_MAX * k as f64 / T_STEPS as f64;
            let lam = linalg::min_eigenvalue(&propagate(&loaded.superop, &rho0, t));
            if lam < best.0 {
                best = (lam, t, rho0.clone());
            }
        }
    }
    let (lambda_min, t, rho0) = best;
    println!("lambda_min = {lambda_min:.6e} at t = {t}");

    std::fs::write(dir.join("redfield_rho0.json"), json::to_pretty(&StateFile::new(&rho0))).expect("write state");
    let witness = Witness {
        format_version: semigroup_forge_cli::FORMAT_VERSION,
        spec: "redfield_spec.json",
        state: "redfield_rho0.json",
        t,
        lambda_min,
        search: Search {
            seed: SEED,
            states: STATES,
            t_max: T_MAX,
            t_steps: T_STEPS,
        },
    };
    std::fs::write(dir.join("redfield_witness.json"), json::to_pretty(&witness)).expect("write witness");
}

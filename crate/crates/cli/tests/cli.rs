use std::path::{Path, PathBuf};
use std::process::Command;

use semigroup_forge::linalg::{self, c, real};
use semigroup_forge::semigroup::evolve_exact;
use semigroup_forge::{CMatrix, DensityMatrix};
use semigroup_forge_cli::commands::{ChoiFile, KrausFile};
use semigroup_forge_cli::json::{self, from_matrix, StateFile};
use semigroup_forge_cli::spec::{self, SpecFile};
use semigroup_forge_cli::trajectory_csv;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semigroup-forge"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf8"),
        stderr: String::from_utf8(out.stderr).expect("utf8"),
    }
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn pauli_spec(dir: &TempDir, gamma: [f64; 3]) -> String {
    let spec = SpecFile::zoo("pauli", serde_json::json!({ "gamma": gamma }));
    write(dir, "pauli.json", &json::to_pretty(&spec))
}

fn state(dir: &TempDir, rho: &CMatrix) -> String {
    write(dir, "state.json", &json::to_pretty(&StateFile::new(rho)))
}

#[test]
fn pauli_gkls_point_passes() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [1.0, 1.0, 1.0]);
    let r = run(&["check", &spec, "--require", "all"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdicts"]["is_gkls"]["pass"], true);
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn pauli_counterexample_fails_cp_but_passes_positivity() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [1.0, 1.0, -1.0]);
    let r = run(&["check", &spec, "--require", "cp"]);
    assert_eq!(r.code, 2);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdicts"]["kossakowski_positivity"]["pass"], true);
    for s in v["verdicts"]["cp_of_exp_tl"].as_array().unwrap() {
        assert_eq!(s["pass"], false);
        assert!(s["min_choi_eigenvalue"].as_f64().unwrap() < 0.0);
    }
    // positivity alone is satisfied
    assert_eq!(run(&["check", &spec, "--require", "positivity"]).code, 0);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", "");
    assert_eq!(run(&["check", &empty]).code, 1);
    let broken = write(&dir, "broken.json", "{\n  \"format_version\": 1,\n  \"format\": \"gks\" oops\n}");
    let r = run(&["check", &broken]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
    let mismatch = write(
        &dir,
        "mismatch.json",
        &json::to_pretty(&SpecFile {
            dim: Some(3),
            ..spec::example("pauli").unwrap()
        }),
    );
    let r = run(&["check", &mismatch]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("dimension mismatch"));
    assert_eq!(run(&["check", "/nonexistent/spec.json"]).code, 1);
    let spec = pauli_spec(&dir, [1.0, 1.0, 1.0]);
    assert_eq!(run(&["check", &spec, "--require", "nonsense"]).code, 1);
    assert_eq!(run_env(&["zoo", "list"], &[("SEMIGROUP_FORGE_THREADS", "zero")]).code, 1);
}

#[test]
fn landau_number_decays_exponentially() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "landau.json",
        &json::to_pretty(&SpecFile::zoo("landau", serde_json::json!({"d": 6, "gamma": 1.0}))),
    );
    let rho = state(&dir, &linalg::unit(6, 3, 3));
    for method in ["exact", "ode"] {
        let r = run(&["evolve", &spec, &rho, "--t1", "2", "--steps", "8", "--method", method]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let rows = trajectory_csv::parse(&r.stdout).unwrap();
        assert_eq!(rows.len(), 9);
        for row in rows {
            let n: f64 = (0..6).map(|k| k as f64 * row.rho[(k, k)].re).sum();
            assert!((n - 3.0 * (-row.t).exp()).abs() < 1e-8, "{method} t={}: {n}", row.t);
        }
    }
}

#[test]
fn zero_length_evolution_returns_input() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [0.2, 0.3, 0.4]);
    let rho0 = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(0.6, 0.0),
        (1, 1) => c(0.4, 0.0),
        (0, 1) => c(0.1, 0.2),
        _ => c(0.1, -0.2),
    });
    let st = state(&dir, &rho0);
    let r = run(&["evolve", &spec, &st, "--t1", "0"]);
    assert_eq!(r.code, 0);
    let rows = trajectory_csv::parse(&r.stdout).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].rho, rho0);
    assert!(r.stdout.starts_with("# format_version=1\nt,tr,lambda_min,purity,re_0_0,im_0_0,"));
}

#[test]
fn exact_csv_matches_library_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [0.2, 0.5, 0.1]);
    let rho0 = linalg::diag(&[0.25, 0.75]) + (linalg::pauli_y() * real(0.1));
    let st = state(&dir, &rho0);
    let r = run(&["evolve", &spec, &st, "--t0", "0.5", "--t1", "3", "--steps", "5"]);
    let rows = trajectory_csv::parse(&r.stdout).unwrap();
    let l = spec::load_path(Path::new(&spec)).unwrap();
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let traj = evolve_exact(&l.superop, &DensityMatrix::new(rho0).unwrap(), &times).unwrap();
    for (row, (st, d)) in rows.iter().zip(traj.states.iter().zip(&traj.diagnostics)) {
        assert_eq!(&row.rho, st);
        assert_eq!(row.lambda_min.to_bits(), d.lambda_min.to_bits());
        assert_eq!(row.purity.to_bits(), d.purity.to_bits());
    }
}

#[test]
fn non_state_input_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [0.2, 0.3, 0.4]);
    let st = state(&dir, &linalg::diag(&[0.5, 0.4]));
    let r = run(&["evolve", &spec, &st]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("trace"), "{}", r.stderr);
    let wrong_dim = state(&dir, &linalg::diag(&[0.5, 0.25, 0.25]));
    assert_eq!(run(&["evolve", &spec, &wrong_dim]).code, 1);
}

#[test]
fn redfield_golden_trajectory_goes_negative() {
    let w: Value = serde_json::from_str(&std::fs::read_to_string(golden("redfield_witness.json")).unwrap()).unwrap();
    let spec = golden("redfield_spec.json");
    let st = golden("redfield_rho0.json");
    let t = w["t"].as_f64().unwrap();
    let r = run(&[
        "evolve",
        spec.to_str().unwrap(),
        st.to_str().unwrap(),
        "--t1",
        &format!("{}", 2.0 * t),
        "--steps",
        "2",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = trajectory_csv::parse(&r.stdout).unwrap();
    assert!(rows.iter().any(|row| row.lambda_min < 0.0));
    let at_t = rows.iter().find(|row| row.t == t).unwrap();
    let recorded = w["lambda_min"].as_f64().unwrap();
    assert!((at_t.lambda_min - recorded).abs() < 1e-10, "{} vs {recorded}", at_t.lambda_min);
    for row in &rows {
        assert!((row.trace - 1.0).abs() < 1e-8);
    }
}

#[test]
fn gks_lindblad_round_trip() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "laser.json", &json::to_pretty(&spec::example("laser").unwrap()));
    let original = spec::load_path(Path::new(&spec)).unwrap().superop;
    let gks = run(&["convert", &spec, "--to", "gks"]);
    assert_eq!(gks.code, 0, "{}", gks.stderr);
    let gks_path = write(&dir, "gks.json", &gks.stdout);
    let lind = run(&["convert", &gks_path, "--to", "lindblad"]);
    assert_eq!(lind.code, 0, "{}", lind.stderr);
    let lind_path = write(&dir, "lind.json", &lind.stdout);
    let back = run(&["convert", &lind_path, "--to", "gks"]);
    let back_path = write(&dir, "back.json", &back.stdout);
    for p in [&gks_path, &lind_path, &back_path] {
        let s = spec::load_path(Path::new(p)).unwrap().superop;
        assert!(linalg::max_abs(&(s.matrix() - original.matrix())) < 1e-10);
    }
}

#[test]
fn lindblad_conversion_of_non_psd_exits_two() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [1.0, 1.0, -1.0]);
    let r = run(&["convert", &spec, "--to", "lindblad"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("eigenvalue -2"), "{}", r.stderr);
    assert_eq!(run(&["convert", &spec, "--to", "kraus@0.5"]).code, 2);
}

#[test]
fn zero_generator_has_no_jumps() {
    let dir = TempDir::new().unwrap();
    let zero = from_matrix(&linalg::zeros(3, 3));
    let spec = SpecFile {
        format_version: 1,
        format: "lindblad".into(),
        dim: Some(3),
        hamiltonian: Some(zero),
        kossakowski: None,
        jumps: Some(vec![]),
        params: None,
    };
    let path = write(&dir, "zero.json", &json::to_pretty(&spec));
    let r = run(&["convert", &path, "--to", "lindblad"]);
    assert_eq!(r.code, 0);
    let out: SpecFile = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(out.jumps.unwrap().len(), 0);
}

#[test]
fn laser_kraus_is_trace_preserving() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "laser.json", &json::to_pretty(&spec::example("laser").unwrap()));
    let r = run(&["convert", &spec, "--to", "kraus@0.1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let k: KrausFile = serde_json::from_str(&r.stdout).unwrap();
    assert!(k.trace_preservation_defect < 1e-9);
    assert!(!k.ops.is_empty());
    let c = run(&["convert", &spec, "--to", "choi@0.1"]);
    let choi: ChoiFile = serde_json::from_str(&c.stdout).unwrap();
    assert!(choi.min_eigenvalue > -1e-9);
}

#[test]
fn zoo_list_and_emit() {
    let r = run(&["zoo", "list"]);
    assert_eq!(r.code, 0);
    let names: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(names, spec::ZOO_NAMES.to_vec());
    let dir = TempDir::new().unwrap();
    for name in names {
        let e = run(&["zoo", "emit", name]);
        assert_eq!(e.code, 0);
        let path = write(&dir, &format!("{name}.json"), &e.stdout);
        let c = run(&["check", &path, "--require", ""]);
        assert!(c.code == 0, "{name}: {}", c.stderr);
    }
    assert_eq!(run(&["zoo", "emit", "unknown"]).code, 1);
}

#[test]
fn check_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let spec = pauli_spec(&dir, [0.7, -0.2, 0.4]);
    let a = run(&["check", &spec, "--seed", "11"]);
    let b = run(&["check", &spec, "--seed", "11"]);
    let c = run_env(&["check", &spec, "--seed", "11"], &[("SEMIGROUP_FORGE_THREADS", "1")]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semigroup_forge::cp::{
    block_positivity_min, evolution_matrix, k_positivity_oracle, realign, smr_decompose, superop_from_evolution,
    transpose_map, unrealign,
};
use semigroup_forge::linalg::{self, real};
use semigroup_forge::semigroup::{
    evolve_exact, evolve_ode, gibbs_state, kossakowski_positivity_check, propagate, semigroup_check, steady_states,
    OdeTolerances,
};
use semigroup_forge::zoo::{
    self, cure_lamb, davies_generator, laser_generator, FnMatrix, FockSpec, LambParams, LambShift, LaserParams,
};
use semigroup_forge::{
    random, ChoiMatrix, CMatrix, DensityMatrix, GksGenerator, Liouvillian, OperatorBasis, Superoperator, EIG_CUTOFF,
};
use semigroup_forge_cli::json::{self, StateFile};
use semigroup_forge_cli::spec::{self, SpecFile};
use serde_json::Value;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn diff(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b))
}

fn pauli_grid() -> Outcome {
    let basis = OperatorBasis::gell_mann(2).map_err(|e| e.to_string())?;
    let values: Vec<f64> = (0..21).map(|k| -2.0 + 0.2 * k as f64).collect();
    let (mut gkls_bad, mut pos_bad, mut points) = (0, 0, 0);
    for &g1 in &values {
        for &g2 in &values {
            for &g3 in &values {
                points += 1;
                let g = zoo::pauli_example_generator([g1, g2, g3]).map_err(|e| e.to_string())?;
                let s = g.superoperator();
                // independent oracles: the closed-form conditions on γ
                let gkls_expected = g1.min(g2).min(g3) >= -TOL;
                let pos_expected = g1 + g2 >= -TOL && g2 + g3 >= -TOL && g3 + g1 >= -TOL;
                let via_superop = GksGenerator::from_superop(&s, &basis).map_err(|e| e.to_string())?;
                if via_superop.generator.is_gkls(TOL).is_gkls != gkls_expected {
                    gkls_bad += 1;
                }
                let pc = kossakowski_positivity_check(&s, semigroup_forge::cp::DEFAULT_RESTARTS, 0x9a11);
                if pc.passes(TOL) != pos_expected {
                    pos_bad += 1;
                }
            }
        }
    }
    ensure(gkls_bad == 0 && pos_bad == 0, || {
        format!("{gkls_bad} GKLS and {pos_bad} positivity disagreements over {points} points")
    })?;

    let g = zoo::pauli_example_generator([1.0, 1.0, -1.0]).map_err(|e| e.to_string())?;
    let s = g.superoperator();
    let pc = kossakowski_positivity_check(&s, semigroup_forge::cp::DEFAULT_RESTARTS, 0x9a11);
    ensure(pc.passes(TOL), || format!("(1,1,-1) fails positivity: {}", pc.min_value))?;
    ensure(!g.is_gkls(TOL).is_gkls, || "(1,1,-1) reported GKLS".into())?;
    for t in [0.1, 1.0] {
        let v = ChoiMatrix::from_superop(&s.exp(t)).is_completely_positive(TOL).map_err(|e| e.to_string())?;
        ensure(!v.is_cp, || format!("(1,1,-1) gives a CP map at t = {t}"))?;
    }
    Ok(format!("{points} points, 0 disagreements; (1,1,-1) positive, not CP"))
}

fn laser_stationarity() -> Outcome {
    let mut notes = Vec::new();
    for (nu, delta) in [(1.0, 0.2), (1.0, 0.5)] {
        let omega = 1.0;
        let p = LaserParams::new(nu, delta, omega).map_err(|e| e.to_string())?;
        let n_th = delta / (nu - delta);
        let d = 16usize.max((30.0 * n_th).ceil() as usize);
        let fock = FockSpec::new(d).map_err(|e| e.to_string())?;
        let s = laser_generator(fock, p).map_err(|e| e.to_string())?.superoperator();
        let ss = steady_states(&s, TOL);
        ensure(ss.len() == 1, || format!("D = {d}: {} steady states", ss.len()))?;
        let rho = &ss[0];
        let n_mean = linalg::trace(&(fock.number() * rho)).re;
        let temperature = omega / (nu / delta).ln();
        let gibbs = gibbs_state(&(fock.number() * real(omega)), temperature).map_err(|e| e.to_string())?;
        let dist = linalg::trace_distance(rho, gibbs.matrix());
        let leak = fock.leakage(rho);
        ensure((n_mean - n_th).abs() <= 1e-6, || format!("D = {d}: <n> = {n_mean}, expected {n_th}"))?;
        ensure(dist <= 1e-6, || format!("D = {d}: trace distance to Gibbs {dist:.3e}"))?;
        ensure(leak <= zoo::LEAKAGE_LIMIT, || format!("D = {d}: leakage {leak:.3e}"))?;
        notes.push(format!("D={d} |dn|={:.1e} dist={dist:.1e} leak={leak:.1e}", (n_mean - n_th).abs()));
    }
    Ok(notes.join("; "))
}

fn form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_round_trip, mut cp_bad, mut count, mut indefinite_count) = (0.0f64, 0, 0, 0);
    for n in 2..=4 {
        let basis = OperatorBasis::gell_mann(n).map_err(|e| e.to_string())?;
        for k in 0..200 {
            count += 1;
            let indefinite = k % 2 == 1;
            let g = random::gks_generator(&mut rng, &basis, 1.0, indefinite);
            let s = g.superoperator();

            let back = GksGenerator::from_superop(&s, &basis).map_err(|e| e.to_string())?;
            worst_round_trip = worst_round_trip
                .max(diff(back.generator.kossakowski(), g.kossakowski()))
                .max(diff(back.generator.hamiltonian(), g.hamiltonian()))
                .max(linalg::max_abs(&back.residual))
                .max(diff(back.generator.superoperator().matrix(), s.matrix()));

            let psd = g.is_gkls(TOL).is_gkls;
            match g.to_lindblad() {
                Ok(l) => {
                    ensure(psd, || format!("N = {n}: Lindblad form built for indefinite C"))?;
                    worst_round_trip = worst_round_trip.max(diff(l.superoperator().matrix(), s.matrix()));
                    let again = GksGenerator::from_lindblad(&l, &basis).map_err(|e| e.to_string())?;
                    worst_round_trip = worst_round_trip
                        .max(diff(again.kossakowski(), g.kossakowski()))
                        .max(diff(again.hamiltonian(), g.hamiltonian()));
                }
                Err(_) => {
                    indefinite_count += 1;
                    ensure(!psd, || format!("N = {n}: PSD C has no Lindblad form"))?;
                }
            }

            for t in [0.1, 1.0] {
                let v = ChoiMatrix::from_superop(&s.exp(t)).is_completely_positive(TOL).map_err(|e| e.to_string())?;
                if v.is_cp != psd {
                    cp_bad += 1;
                }
            }
        }
    }
    ensure(worst_round_trip <= 1e-10, || format!("round trip defect {worst_round_trip:.3e}"))?;
    ensure(cp_bad == 0, || format!("{cp_bad} CP disagreements over {count} generators"))?;
    Ok(format!(
        "{count} generators ({indefinite_count} indefinite), round trip {worst_round_trip:.1e}, 0 CP disagreements"
    ))
}

fn kraus_choi_stinespring() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut rt, mut tp, mut iso, mut oracle_min) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for k in 0..200 {
        let n = rng.random_range(2..=4);
        let rank = rng.random_range(1..=n * n);
        let ch = random::kraus_channel(&mut rng, n, rank);
        let s = ch.to_superop();
        let choi = ChoiMatrix::from_superop(&s);
        let recovered = choi.kraus(EIG_CUTOFF).map_err(|e| e.to_string())?;
        rt = rt.max(diff(recovered.to_superop().matrix(), s.matrix()));
        tp = tp.max(recovered.trace_preservation_defect());
        iso = iso.max(recovered.stinespring().isometry_defect());
        let verdict = choi.is_completely_positive(TOL).map_err(|e| e.to_string())?;
        let sample = k_positivity_oracle(&s, n, 1000, 0x0c1e + k as u64);
        oracle_min = oracle_min.min(sample.min_value);
        ensure(verdict.is_cp, || format!("channel {k}: Choi verdict says not CP"))?;
        ensure(sample.min_value >= -TOL, || {
            format!("channel {k}: oracle found {} on a CP map", sample.min_value)
        })?;
    }
    ensure(rt <= 1e-9, || format!("Kraus round trip {rt:.3e}"))?;
    ensure(tp <= 1e-9, || format!("sum K^dagger K defect {tp:.3e}"))?;
    ensure(iso <= 1e-8, || format!("isometry defect {iso:.3e}"))?;
    Ok(format!(
        "round trip {rt:.1e}, TP {tp:.1e}, isometry {iso:.1e}, oracle min {oracle_min:.1e}"
    ))
}

fn positive_not_cp_gap() -> Outcome {
    let mut notes = Vec::new();
    for n in [2, 3] {
        let s = transpose_map(n);
        let b = realign(&evolution_matrix(&s)).map_err(|e| e.to_string())?.b;
        let bp = block_positivity_min(&b, n, n, 32, 5);
        let lam = linalg::min_eigenvalue(ChoiMatrix::from_superop(&s).matrix());
        ensure(bp.min_value >= -TOL, || format!("N = {n}: block positivity {}", bp.min_value))?;
        ensure((lam + 1.0).abs() <= 1e-10, || format!("N = {n}: Choi lambda_min {lam}"))?;
        ensure(smr_decompose(&b, TOL).is_err(), || format!("N = {n}: transpose map decomposed"))?;
        notes.push(format!("N={n} block min {:.1e}, lambda_min {lam:.12}", bp.min_value));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut accepted, mut rejected, mut worst) = (0, 0, 0.0f64);
    for k in 0..100 {
        let n = rng.random_range(2..=3);
        let b = if k % 2 == 0 {
            let rank = rng.random_range(1..=n * n);
            random::psd(&mut rng, n * n, rank)
        } else {
            random::hermitian(&mut rng, n * n)
        };
        let psd = linalg::min_eigenvalue(&b) >= -TOL;
        match smr_decompose(&b, TOL) {
            Ok(dec) => {
                ensure(psd, || format!("case {k}: non-PSD B decomposed"))?;
                accepted += 1;
                let map = superop_from_evolution(&unrealign(&b).map_err(|e| e.to_string())?, n);
                let rho = random::mixed_state(&mut rng, n).into_matrix();
                worst = worst.max(diff(&dec.apply(&rho), &map.apply(&rho)));
            }
            Err(_) => {
                ensure(!psd, || format!("case {k}: PSD B rejected"))?;
                rejected += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("decomposition action defect {worst:.3e}"))?;
    notes.push(format!("smr: {accepted} accepted, {rejected} rejected, action defect {worst:.1e}"));
    Ok(notes.join("; "))
}

fn trace_decreases(s: &Superoperator, rng: &mut ChaCha8Rng, what: &str) -> Result<f64, String> {
    let mut total_drop = f64::INFINITY;
    for _ in 0..10 {
        let rho = random::mixed_state(rng, s.dim()).into_matrix();
        let traces: Vec<f64> = (0..=40)
            .map(|k| linalg::trace(&propagate(s, &rho, 0.1 * k as f64)).re)
            .collect();
        for w in traces.windows(2) {
            ensure(w[1] <= w[0] + 1e-10, || format!("{what}: trace rises from {} to {}", w[0], w[1]))?;
        }
        let drop = traces[0] - traces[40];
        ensure(drop > 1e-6, || format!("{what}: trace does not decrease ({drop:.3e})"))?;
        total_drop = total_drop.min(drop);
    }
    Ok(total_drop)
}

fn zoo_fates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sx = linalg::pauli_x();
    let optical = zoo::optical_potential_generator(&sx, &linalg::diag(&[0.1, 0.5])).map_err(|e| e.to_string())?;
    let d_opt = trace_decreases(&optical, &mut rng, "optical potential")?;
    let lp = LambParams::new(sx.clone(), 0.5, 1.0).map_err(|e| e.to_string())?;
    let lamb = zoo::lamb_generator(&lp).map_err(|e| e.to_string())?;
    let d_lamb = trace_decreases(&lamb, &mut rng, "Lamb")?;

    let cured = cure_lamb(&lp, None).map_err(|e| e.to_string())?.superoperator();
    let cured_tp = cured.generator_trace_defect();
    ensure(cured_tp <= TOL, || format!("cured Lamb trace defect {cured_tp:.3e}"))?;
    let cured_gks = GksGenerator::from_superop(&cured, &OperatorBasis::gell_mann(2).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let v = cured_gks.generator.is_gkls(TOL);
    ensure(v.is_gkls, || format!("cured Lamb Kossakowski eigenvalue {}", v.min_eigenvalue))?;

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let witness: Value = read_json(&golden.join("redfield_witness.json"))?;
    let t = witness["t"].as_f64().ok_or("witness t")?;
    let recorded = witness["lambda_min"].as_f64().ok_or("witness lambda_min")?;
    let loaded = spec::load_path(&golden.join(witness["spec"].as_str().ok_or("witness spec")?))
        .map_err(|e| e.to_string())?;
    let state: StateFile = read_json(&golden.join(witness["state"].as_str().ok_or("witness state")?))?;
    let rho0 = json::to_matrix(&state.rho, "rho").map_err(|e| e.to_string())?;
    let lam = linalg::min_eigenvalue(&propagate(&loaded.superop, &rho0, t));
    ensure(lam < -1e-4, || format!("Redfield witness lambda_min {lam:.3e}"))?;
    ensure((lam - recorded).abs() <= 1e-9, || format!("Redfield witness {lam} differs from recorded {recorded}"))?;

    // two-level thermal bath with a KMS spectrum pinned to the laser rates
    let (nu, omega, temperature): (f64, f64, f64) = (1.0, 1.0, 0.5);
    let delta = nu * (-omega / temperature).exp();
    let spectrum = FnMatrix::new(1, move |w: f64| {
        let v = 2.0 * nu * (1.0 + (-omega / temperature).exp()) / (1.0 + (-w / temperature).exp());
        Some(CMatrix::from_element(1, 1, real(v)))
    });
    let fock = FockSpec::new(2).map_err(|e| e.to_string())?;
    let h = fock.number() * real(omega);
    let davies = davies_generator(&h, &[sx], &spectrum, LambShift::Zero)
        .map_err(|e| e.to_string())?
        .superoperator();
    let laser = laser_generator(fock, LaserParams::new(nu, delta, omega).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .superoperator();
    let structure = diff(davies.matrix(), laser.matrix());
    ensure(structure <= 1e-9, || format!("Davies vs laser {structure:.3e}"))?;
    let ss = steady_states(&davies, TOL);
    ensure(ss.len() == 1, || format!("Davies has {} steady states", ss.len()))?;
    let gibbs = gibbs_state(&h, temperature).map_err(|e| e.to_string())?;
    let dist = linalg::trace_distance(&ss[0], gibbs.matrix());
    ensure(dist <= 1e-7, || format!("Davies steady state {dist:.3e} from Gibbs"))?;

    Ok(format!(
        "trace drops >= {:.2e}/{:.2e}; cured TP {cured_tp:.1e}; Redfield lambda_min {lam:.4e}; Davies {structure:.1e}, Gibbs {dist:.1e}",
        d_opt, d_lamb
    ))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Zoo examples restricted to N ≤ 8; the laser is rerun at d = 8 with a
/// weak pump so the truncation stays faithful.
fn small_zoo() -> Result<Vec<(&'static str, spec::Loaded)>, String> {
    spec::ZOO_NAMES
        .iter()
        .map(|&name| {
            let mut s = spec::example(name).map_err(|e| e.to_string())?;
            if name == "laser" {
                let p = s.params.as_mut().ok_or("laser params")?;
                p["d"] = 8.into();
                p["delta"] = 0.01.into();
            }
            let l = spec::load(&s, Path::new(".")).map_err(|e| e.to_string())?;
            ensure(l.dim() <= 8, || format!("{name} has N = {}", l.dim()))?;
            Ok((name, l))
        })
        .collect()
}

fn evolution_numerics() -> Outcome {
    let tol = OdeTolerances::default();
    let bound = (10.0 * tol.rtol).max(1e-8);
    let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let zoo = small_zoo()?;
    let mut worst = 0.0f64;
    for (name, l) in &zoo {
        let rho0 = match l.fock {
            // start on the two lowest levels
            Some(f) => {
                let low = random::mixed_state(&mut rng, 2).into_matrix();
                let mut m = linalg::zeros(f.dim(), f.dim());
                m.view_mut((0, 0), (2, 2)).copy_from(&low);
                DensityMatrix::new(m).map_err(|e| e.to_string())?
            }
            None => random::mixed_state(&mut rng, l.dim()),
        };
        let exact = evolve_exact(&l.superop, &rho0, &times).map_err(|e| e.to_string())?;
        let ode = evolve_ode(&*l.liouvillian, &rho0, &times, tol).map_err(|e| e.to_string())?;
        let dev = ode.max_deviation(&exact);
        ensure(dev <= bound, || format!("{name}: ODE deviates by {dev:.3e}"))?;
        if let Some(f) = l.fock {
            let leak = exact.states.iter().map(|r| f.leakage(r)).fold(0.0, f64::max);
            ensure(leak <= zoo::LEAKAGE_LIMIT, || format!("{name}: leakage {leak:.3e}"))?;
        }
        worst = worst.max(dev);
    }
    let mut worst_sg = 0.0f64;
    for k in 0..50 {
        let (_, l) = &zoo[k % zoo.len()];
        let t = rng.random_range(0.0..3.0);
        let s = rng.random_range(0.0..3.0);
        worst_sg = worst_sg.max(semigroup_check(&l.superop, t, s));
    }
    ensure(worst_sg <= 1e-9, || format!("semigroup defect {worst_sg:.3e}"))?;
    Ok(format!(
        "{} generators, ODE deviation {worst:.1e} (bound {bound:.0e}), semigroup defect {worst_sg:.1e}",
        zoo.len()
    ))
}

fn cli(args: &[&str], threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semigroup-forge"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("SEMIGROUP_FORGE_THREADS", n);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    ensure(code == 0 || code == 2, || {
        format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    let mut bytes = out.stdout;
    bytes.extend_from_slice(format!("exit {code}\n").as_bytes());
    Ok(bytes)
}

/// Every zoo spec through check, evolve and convert.
fn cli_suite(dir: &Path, threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut all = cli(&["zoo", "list"], threads)?;
    for name in spec::ZOO_NAMES {
        let spec_path = dir.join(format!("{name}.json"));
        let state_path = dir.join(format!("{name}_state.json"));
        let (sp, st) = (spec_path.to_str().ok_or("path")?, state_path.to_str().ok_or("path")?);
        all.extend(cli(&["check", sp, "--require", "all"], threads)?);
        all.extend(cli(&["evolve", sp, st, "--t1", "2", "--steps", "8"], threads)?);
        all.extend(cli(&["evolve", sp, st, "--t1", "2", "--steps", "8", "--method", "ode"], threads)?);
        all.extend(cli(&["convert", sp, "--to", "choi@0.5"], threads)?);
    }
    Ok(all)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in spec::ZOO_NAMES {
        let emitted = cli(&["zoo", "emit", name], None)?;
        let text = String::from_utf8(emitted).map_err(|e| e.to_string())?;
        let text = text.trim_end_matches("exit 0\n");
        let s: SpecFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let l = spec::load(&s, Path::new(".")).map_err(|e| e.to_string())?;
        std::fs::write(dir.path().join(format!("{name}.json")), text).map_err(|e| e.to_string())?;
        let rho = DensityMatrix::maximally_mixed(l.dim());
        std::fs::write(
            dir.path().join(format!("{name}_state.json")),
            json::to_pretty(&StateFile::new(rho.matrix())),
        )
        .map_err(|e| e.to_string())?;
    }
    let first = cli_suite(dir.path(), None)?;
    let second = cli_suite(dir.path(), None)?;
    ensure(first == second, || "two consecutive runs differ".into())?;
    let single = cli_suite(dir.path(), Some("1"))?;
    ensure(first == single, || "single-threaded run differs".into())?;
    Ok(format!("{} bytes identical across two runs and one single-threaded run", first.len()))
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "1 qubit family: GKLS and positivity verdicts on the 21^3 grid",
            limit: Some(Duration::from_secs(60)),
            run: pauli_grid,
        },
        Criterion {
            name: "2 laser steady state is the Gibbs state",
            limit: Some(Duration::from_secs(30)),
            run: laser_stationarity,
        },
        Criterion {
            name: "3 GKS, Lindblad and superoperator forms agree; CP iff C >= 0",
            limit: None,
            run: form_equivalence,
        },
        Criterion {
            name: "4 Kraus, Choi and Stinespring consistency",
            limit: None,
            run: kraus_choi_stinespring,
        },
        Criterion {
            name: "5 positive but not completely positive maps",
            limit: None,
            run: positive_not_cp_gap,
        },
        Criterion {
            name: "6 zoo fates",
            limit: None,
            run: zoo_fates,
        },
        Criterion {
            name: "7 ODE and exact evolution agree; semigroup law",
            limit: None,
            run: evolution_numerics,
        },
        Criterion {
            name: "8 CLI output is byte-identical across runs",
            limit: None,
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:.0?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {} [{detail}] ({elapsed:.1?})", c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL {} [{why}] ({elapsed:.1?})", c.name);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

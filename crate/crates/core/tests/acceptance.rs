//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use protective::channel::{apply_ideal_channel, IdealChannel};
use protective::detectors::{build_momentum_grid, make_detector_bank, PointerDistribution};
use protective::finite_time::*;
use protective::linalg::{frobenius, pauli, unitarity_defect, CMatrix, CVector, C64};
use protective::quantum::*;
use protective::qubit::*;
use protective::run::{run, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

fn outcome_law() -> Outcome {
    let cases = [
        ([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        ([0.3, 0.0, 0.4], [0.0, 0.0, 1.0]),
        ([0.6, 0.0, 0.0], [1.0, 0.0, 0.0]),
    ];
    let n = 10_000usize;
    let seeds: Vec<u64> = (0..n as u64).collect();
    let mut parts = Vec::new();
    let mut ok = true;
    for (s, e) in cases {
        let proto = QubitProtocol::new(
            BlochState::new(s).map_err(|e| e.to_string())?,
            FieldConfig::new(1.0, e).map_err(|e| e.to_string())?,
            [DEFAULT_DELTA; 3],
        )
        .map_err(|e| e.to_string())?;
        let runs = proto.run_many(&seeds).map_err(|e| e.to_string())?;
        let plus = runs.iter().filter(|r| r.branch == Some(QubitBranch::Plus)).count();
        let q = proto.plus_probability();
        let freq = plus as f64 / n as f64;
        let tol = 3.0 * (q * (1.0 - q) / n as f64).sqrt();
        ok &= (freq - q).abs() <= tol;
        parts.push(format!("q={q:.2} f={freq:.4} tol={tol:.4}"));
    }
    check(ok, parts.join("; "))
}

fn axis_recovery() -> Outcome {
    let e = unit([0.48, -0.6, 0.64]);
    let proto = QubitProtocol::new(
        BlochState::new([0.2, 0.1, -0.3]).map_err(|e| e.to_string())?,
        FieldConfig::new(1.0, e).map_err(|e| e.to_string())?,
        [0.1; 3],
    )
    .map_err(|e| e.to_string())?;
    let mut errors = Vec::with_capacity(200);
    for rep in 0..200u64 {
        let seeds: Vec<u64> = (0..1000).map(|i| rep * 1000 + i).collect();
        let xs: Vec<[f64; 3]> = proto
            .run_many(&seeds)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| [r.sample.x[0], r.sample.x[1], r.sample.x[2]])
            .collect();
        let est = estimate_axis(&xs).map_err(|e| e.to_string())?;
        errors.push(est.angle_to(&e).to_degrees());
    }
    errors.sort_by(f64::total_cmp);
    let median = 0.5 * (errors[99] + errors[100]);
    let p95 = errors[189];
    check(
        median <= 0.5 && p95 <= 1.0,
        format!("median={median:.3} deg p95={p95:.3} deg"),
    )
}

fn eigenvalue_independence() -> Outcome {
    let e = unit([0.3, -0.5, 0.8]);
    let rho = make_qubit_state(&BlochState::new([0.1, 0.4, -0.2]).unwrap()).unwrap();
    let dist = |omega: f64| -> PointerDistribution {
        let ch = pauli_channel(&FieldConfig::new(omega, e).unwrap(), &[DEFAULT_DELTA; 3]).unwrap();
        apply_ideal_channel(&ch, &rho).unwrap().0
    };
    let (a, b) = (dist(1.0), dist(10.0));
    let mut worst = 0.0f64;
    for (x, y) in a.components().iter().zip(b.components()) {
        worst = worst.max((x.weight - y.weight).abs());
        for k in 0..3 {
            worst = worst.max((x.center[k] - y.center[k]).abs());
            worst = worst.max((x.deltas[k] - y.deltas[k]).abs());
        }
    }
    check(
        a.components().len() == b.components().len() && worst <= 1e-12,
        format!("max componentwise difference {worst:.1e}"),
    )
}

fn qubit_basis(observable: CMatrix) -> FiniteTimeConfig {
    let [_, _, sz] = pauli();
    let basis = spectral_decompose(&HermitianOperator::new(sz).unwrap()).unwrap();
    FiniteTimeConfig::new(10.0, vec![HermitianOperator::new(observable).unwrap()], basis).unwrap()
}

fn offdiagonal_suppression() -> Outcome {
    let [sx, _, _] = pauli();
    let cfg = qubit_basis(sx);
    let sweep = geometric_sweep(10.0, 1000.0, 10).map_err(|e| e.to_string())?;
    let mut bound_ok = true;
    for &t in &sweep {
        let at_t = cfg.with_duration(t).map_err(|e| e.to_string())?;
        for od in &time_averaged_offdiagonals(&at_t).map_err(|e| e.to_string())?[0] {
            // |<n|sigma_x|m>| = 1 and the gap is 2
            bound_ok &= od.value.norm() <= 2.0 / (t * 2.0) + 1e-12;
        }
    }
    let bank = make_detector_bank(&[0.5]).map_err(|e| e.to_string())?;
    let grid = build_momentum_grid(&bank, 64, 5.0).map_err(|e| e.to_string())?;
    let curve = convergence_curve(&cfg, &grid, &cfg.table().shift_vectors(), &sweep)
        .map_err(|e| e.to_string())?;
    let slope = curve.envelope_slope.unwrap_or(f64::NAN);
    check(
        bound_ok && (slope + 2.0).abs() <= 0.3,
        format!("bound held at {} durations, envelope slope {slope:.3}", sweep.len()),
    )
}

fn commuting_exactness() -> Outcome {
    let [_, _, sz] = pauli();
    let cfg = qubit_basis(sz);
    let bank = make_detector_bank(&[0.5]).unwrap();
    let grid = build_momentum_grid(&bank, 64, 5.0).unwrap();
    let shifts = cfg.table().shift_vectors();
    let mut worst = 0.0f64;
    for t in geometric_sweep(10.0, 1000.0, 10).unwrap() {
        let at_t = cfg.with_duration(t).unwrap();
        for k in 0..grid.node_count() {
            let (p, _) = grid.product_node(k);
            let finite = conditional_unitary(&p, &at_t).map_err(|e| e.to_string())?;
            let ideal = ideal_conditional_unitary(&p, &shifts, at_t.hamiltonian()).unwrap();
            worst = worst.max(frobenius(&(finite - ideal)));
        }
    }
    check(worst <= 1e-10, format!("max ||U_T - U_inf||_F = {worst:.1e}"))
}

fn brute_force_oracle() -> Outcome {
    let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.0]).unwrap();
    let a = HermitianOperator::diagonal(&[5.0, 6.0, 7.0]).unwrap();
    let dx = 0.3;
    let ch = IdealChannel::from_operators(&h, &[a], make_detector_bank(&[dx]).unwrap())
        .map_err(|e| e.to_string())?;
    let amps = [C64::new(0.6, 0.0), C64::new(0.0, -0.48), C64::new(0.64, 0.0)];
    let state = SystemState::pure_normalized(CVector::from_column_slice(&amps)).unwrap();
    let (dist, _) = apply_ideal_channel(&ch, &state).map_err(|e| e.to_string())?;
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let centers = [5.0, 6.0, 7.0];
    let mut worst = 0.0f64;
    for k in 0..512 {
        let x = 3.0 + 6.0 * k as f64 / 511.0;
        let mut brute = 0.0;
        for (amp, c) in amps.iter().zip(centers) {
            let z = (x - c) / dx;
            brute += amp.norm_sqr() / norm * (-0.5 * z * z).exp()
                / (dx * (2.0 * std::f64::consts::PI).sqrt());
        }
        worst = worst.max((dist.density_at(&[x]).unwrap() - brute).abs());
    }
    check(worst <= 1e-9, format!("max pointwise difference {worst:.1e} on 512 points"))
}

fn random_hermitian(d: usize, r: &mut ChaCha8Rng) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(r.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).unwrap()
}

fn integrate_1d(dist: &PointerDistribution, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.5 * (dist.density_at(&[lo]).unwrap() + dist.density_at(&[hi]).unwrap());
    for k in 1..n {
        acc += dist.density_at(&[lo + k as f64 * h]).unwrap();
    }
    acc * h
}

fn run_twice(config: &str) -> Result<bool, String> {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut cfg = RunConfig::from_json(config).map_err(|e| e.to_string())?;
        cfg.output_dir = dir.path().to_path_buf();
        let report = run(&cfg).map_err(|e| e.to_string())?;
        let mut files = Vec::new();
        for f in &report.files {
            files.push(fs::read(dir.path().join(f)).map_err(|e| e.to_string())?);
        }
        outputs.push(files);
    }
    Ok(outputs[0] == outputs[1] && !outputs[0].is_empty())
}

fn property_suites() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let mut unitary_worst = 0.0f64;
    let mut state_worst = 0.0f64;
    let mut norm_worst = 0.0f64;
    for trial in 0..40 {
        let d = 2 + trial % 3;
        let basis = spectral_decompose(&random_hermitian(d, &mut r)).map_err(|e| e.to_string())?;
        unitary_worst = unitary_worst.max(unitarity_defect(basis.eigenvectors()));
        let obs = vec![random_hermitian(d, &mut r)];
        let cfg = FiniteTimeConfig::new(r.random_range(1.0..200.0), obs.clone(), basis.clone())
            .map_err(|e| e.to_string())?;
        let p = [r.random_range(-10.0..10.0)];
        unitary_worst = unitary_worst.max(unitarity_defect(&conditional_unitary(&p, &cfg).unwrap()));

        // random mixed state: normalized Gram matrix
        let g = CMatrix::from_fn(d, d, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let raw = &g * g.adjoint();
        let rho = raw.unscale(raw.trace().re);
        let state = SystemState::mixed(rho).map_err(|e| e.to_string())?;
        let dm = state.to_density_matrix();
        let eig = dm.clone().symmetric_eigen().eigenvalues;
        state_worst = state_worst
            .max((dm.trace().re - 1.0).abs())
            .max(frobenius(&(&dm - dm.adjoint())))
            .max(eig.iter().fold(0.0f64, |acc, &e| acc.max(-e)));

        let dx = r.random_range(0.05..0.3);
        let ch = IdealChannel::new(basis.clone(), cfg.table(), make_detector_bank(&[dx]).unwrap())
            .map_err(|e| e.to_string())?;
        let (dist, _) = apply_ideal_channel(&ch, &state).map_err(|e| e.to_string())?;
        // base grid 250 intervals, refined twice
        let integral = integrate_1d(&dist, -3.0, 3.0, 1000);
        norm_worst = norm_worst.max((integral - 1.0).abs());
    }
    let demo = r#"{"mode":"qubit-demo","system":{"qubit":{"s":[0.3,0,0.4],"e":[0,0,1]}},
                   "seed":9,"n_samples":500,"test_mode":true}"#;
    let ideal = r#"{"mode":"ideal-run","system":{"matrices":{
                     "hamiltonian":[[[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[2,0]]],
                     "observables":[[[[5,0],[0,0],[0,0]],[[0,0],[6,0],[0,0]],[[0,0],[0,0],[7,0]]]],
                     "state":{"psi":[[0.6,0],[0,0.48],[0.64,0]]}}},
                   "detectors":{"deltas":[0.1]},"seed":3,"n_samples":200}"#;
    let deterministic = run_twice(demo)? && run_twice(ideal)?;
    check(
        unitary_worst <= 1e-9 && state_worst <= 1e-10 && norm_worst <= 1e-4 && deterministic,
        format!(
            "unitarity {unitary_worst:.1e}, state {state_worst:.1e}, normalization {norm_worst:.1e}, deterministic={deterministic}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 7] = [
        ("qubit outcome law", Duration::from_secs(10), outcome_law),
        ("axis recovery", Duration::from_secs(30), axis_recovery),
        ("eigenvalue independence", Duration::MAX, eigenvalue_independence),
        ("off-diagonal suppression", Duration::from_secs(60), offdiagonal_suppression),
        ("commuting-case exactness", Duration::MAX, commuting_exactness),
        ("brute-force density oracle", Duration::MAX, brute_force_oracle),
        ("property suites", Duration::from_secs(60), property_suites),
    ];
    let mut failures = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (status, detail) = match &outcome {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over budget {budget:?}")),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} {}. {name}: {detail} [{:.2}s]", k + 1, elapsed.as_secs_f64());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

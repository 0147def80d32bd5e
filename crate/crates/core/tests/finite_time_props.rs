mod common;

use common::{frob, matmul, random_hermitian, rng};
use protective::detectors::{build_momentum_grid, make_detector_bank};
use protective::finite_time::*;
use protective::linalg::{expm_hermitian, pauli, unitarity_defect, CMatrix, C64};
use protective::quantum::{spectral_decompose, HermitianOperator, SpectralDecomposition};

fn qubit() -> (SpectralDecomposition, Vec<HermitianOperator>) {
    let [sx, _, sz] = pauli();
    let basis = spectral_decompose(&HermitianOperator::new(sz).unwrap()).unwrap();
    (basis, vec![HermitianOperator::new(sx).unwrap()])
}

/// `e^{iHT} exp(-iT(H + sum_a p_a A_a / T))`: the slicing-free propagator.
fn exact_propagator(p: &[f64], cfg: &FiniteTimeConfig) -> CMatrix {
    let t = cfg.duration();
    let h = cfg.hamiltonian().reconstruct();
    let mut gen = h.clone();
    for (a, &pa) in cfg.observables().iter().zip(p) {
        gen += a.matrix().scale(pa / t);
    }
    matmul(&expm_hermitian(&h, -t), &expm_hermitian(&gen, t))
}

/// `sum_n exp(-i sum_a p_a <A_a>_n) |n><n|`, built from the eigenvectors.
fn ideal_oracle(p: &[f64], cfg: &FiniteTimeConfig) -> CMatrix {
    let basis = cfg.hamiltonian();
    let d = basis.dimension();
    let mut u = CMatrix::zeros(d, d);
    for n in 0..d {
        let v = basis.eigenvector(n);
        let mut phase = 0.0;
        for (a, &pa) in cfg.observables().iter().zip(p) {
            let av = a.matrix() * &v;
            phase += pa * v.dotc(&av).re;
        }
        u += (&v * v.adjoint()).scale(1.0) * C64::from_polar(1.0, -phase);
    }
    u
}

#[test]
fn conditional_unitary_matches_exact_propagator() {
    let (basis, obs) = qubit();
    for &t in &[20.0, 100.0, 1000.0] {
        let cfg = FiniteTimeConfig::new(t, obs.clone(), basis.clone()).unwrap();
        for &p in &[-5.0, 1.0, 5.0] {
            let u = conditional_unitary(&[p], &cfg).unwrap();
            let err = frob(&(u - exact_propagator(&[p], &cfg)));
            assert!(err < 1e-7, "T={t} p={p} err={err:e}");
        }
    }
}

#[test]
fn random_three_level_matches_exact_propagator() {
    let mut r = rng(11);
    for _ in 0..4 {
        let basis = spectral_decompose(&random_hermitian(3, &mut r)).unwrap();
        let obs = vec![random_hermitian(3, &mut r), random_hermitian(3, &mut r)];
        let cfg = FiniteTimeConfig::new(30.0, obs, basis).unwrap();
        let p = [0.7, -1.3];
        let u = conditional_unitary(&p, &cfg).unwrap();
        assert!(frob(&(u - exact_propagator(&p, &cfg))) < 1e-8);
    }
}

#[test]
fn telescoped_and_sequential_products_agree() {
    let mut r = rng(5);
    let basis = spectral_decompose(&random_hermitian(3, &mut r)).unwrap();
    let obs = vec![random_hermitian(3, &mut r)];
    for steps in [1u64, 2, 3, 17, 1000] {
        let cfg = FiniteTimeConfig::new(7.5, obs.clone(), basis.clone())
            .unwrap()
            .with_steps(steps)
            .unwrap();
        let a = conditional_unitary(&[2.0], &cfg).unwrap();
        let b = conditional_unitary_sequential(&[2.0], &cfg).unwrap();
        assert!(frob(&(a - b)) < 1e-11, "steps={steps}");
    }
}

#[test]
fn tenfold_refinement_changes_propagator_below_1e_8() {
    let (basis, obs) = qubit();
    let cfg = FiniteTimeConfig::new(20.0, obs, basis).unwrap();
    let fine = cfg.clone().with_steps(cfg.steps() * 10).unwrap();
    let diff = frob(&(conditional_unitary(&[1.0], &cfg).unwrap()
        - conditional_unitary(&[1.0], &fine).unwrap()));
    assert!(diff <= 1e-8, "diff={diff:e}");
}

#[test]
fn default_steps_cover_ten_slices_per_period() {
    for &(t, gap) in &[(10.0, 2.0), (1e6, 2.0), (1e4, 300.0)] {
        let n = default_steps(t, gap);
        assert!(n as f64 >= (10.0 * t * gap / (2.0 * std::f64::consts::PI)).ceil());
    }
}

#[test]
fn step_doubling_is_converged() {
    let mut r = rng(21);
    for _ in 0..5 {
        let basis = spectral_decompose(&random_hermitian(2, &mut r)).unwrap();
        let obs = vec![random_hermitian(2, &mut r)];
        let cfg = FiniteTimeConfig::new(50.0, obs, basis).unwrap();
        let doubled = cfg.clone().with_steps(cfg.steps() * 2).unwrap();
        let diff = frob(&(conditional_unitary(&[3.0], &cfg).unwrap()
            - conditional_unitary(&[3.0], &doubled).unwrap()));
        assert!(diff <= 1e-6);
    }
}

#[test]
fn propagators_are_unitary() {
    let mut r = rng(3);
    for d in [2, 3, 5] {
        let basis = spectral_decompose(&random_hermitian(d, &mut r)).unwrap();
        let obs = vec![random_hermitian(d, &mut r), random_hermitian(d, &mut r)];
        let cfg = FiniteTimeConfig::new(40.0, obs, basis.clone()).unwrap();
        let p = [4.0, -2.5];
        let u = conditional_unitary(&p, &cfg).unwrap();
        assert!(unitarity_defect(&u) <= 1e-10);
        let shifts = cfg.table().shift_vectors();
        let ideal = ideal_conditional_unitary(&p, &shifts, &basis).unwrap();
        assert!(unitarity_defect(&ideal) <= 1e-10);
        assert!(frob(&(ideal - ideal_oracle(&p, &cfg))) < 1e-12);
    }
}

#[test]
fn commuting_observable_reaches_ideal_at_any_duration() {
    let mut r = rng(8);
    let h = random_hermitian(3, &mut r);
    let basis = spectral_decompose(&h).unwrap();
    // a polynomial in H commutes with H
    let hm = h.matrix();
    let a = HermitianOperator::new(hm.scale(0.5) + matmul(hm, hm).scale(-1.5)).unwrap();
    for &t in &[0.3, 10.0, 1000.0] {
        let cfg = FiniteTimeConfig::new(t, vec![a.clone()], basis.clone()).unwrap();
        for &p in &[-10.0, 0.1, 7.0] {
            let u = conditional_unitary(&[p], &cfg).unwrap();
            assert!(frob(&(u - ideal_oracle(&[p], &cfg))) <= 1e-10, "T={t} p={p}");
        }
    }
}

#[test]
fn offdiagonal_averages_match_quadrature_and_bound() {
    let mut r = rng(17);
    let basis = spectral_decompose(&random_hermitian(3, &mut r)).unwrap();
    let obs = vec![random_hermitian(3, &mut r)];
    for &t in &[0.01, 3.0, 250.0] {
        let cfg = FiniteTimeConfig::new(t, obs.clone(), basis.clone()).unwrap();
        let w = basis.eigenvalues();
        let v = basis.eigenvectors();
        let a_eig = v.adjoint() * obs[0].matrix() * v;
        for od in &time_averaged_offdiagonals(&cfg).unwrap()[0] {
            // composite Simpson on (1/T) int_0^T a_nm e^{i(w_n - w_m)t} dt
            let k = 20_000;
            let h = t / k as f64;
            let f = |s: f64| a_eig[(od.n, od.m)] * C64::from_polar(1.0, (w[od.n] - w[od.m]) * s);
            let mut acc = f(0.0) + f(t);
            for j in 1..k {
                acc += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            let quad = acc * (h / 3.0) / t;
            assert!((quad - od.value).norm() < 1e-9, "T={t} ({},{})", od.n, od.m);
            assert!(od.value.norm() <= od.bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn distance_decays_and_is_grid_converged() {
    let (basis, obs) = qubit();
    let bank = make_detector_bank(&[0.5]).unwrap();
    let grid = build_momentum_grid(&bank, 64, 5.0).unwrap();
    let fine = build_momentum_grid(&bank, 128, 5.0).unwrap();
    let cfg = FiniteTimeConfig::new(10.0, obs, basis).unwrap();
    let shifts = cfg.table().shift_vectors();

    let d64 = channel_distance(&cfg, &grid, &shifts).unwrap();
    let d128 = channel_distance(&cfg, &fine, &shifts).unwrap();
    assert!((d64 - d128).abs() < 1e-6, "{d64} vs {d128}");

    let sweep = geometric_sweep(10.0, 1000.0, 10).unwrap();
    let curve = convergence_curve(&cfg, &grid, &shifts, &sweep).unwrap();
    let decade_max = |lo: f64, hi: f64| {
        curve
            .points
            .iter()
            .filter(|(t, _)| *t >= lo && *t <= hi)
            .map(|&(_, d)| d)
            .fold(0.0, f64::max)
    };
    assert!(decade_max(100.0, 1000.0) < decade_max(10.0, 100.0));
    let slope = curve.envelope_slope.unwrap();
    assert!((slope + 2.0).abs() <= 0.3, "slope={slope}");
}

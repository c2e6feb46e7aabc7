//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `--nocapture`). Run via
//! `cargo test -p lindbloch --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use lindbloch::analysis::{asymptotic_fit, ep_sweep, fixed_points, stability, FixedPointKind};
use lindbloch::linalg::Mat2c;
use lindbloch::liouvillian::{
    build_generator, classify_regime, eigendecompose, gksl_rhs_oracle, Regime,
};
use lindbloch::propagator::{propagate, sample_trajectory, ClosedFormSolution};
use lindbloch::spherical_dynamics::{integrate, spherical_rhs, POLE_SWITCH_ENTER};
use lindbloch::state_space::{
    bloch_to_density, cartesian_to_spherical, density_to_bloch, spherical_to_cartesian,
    von_neumann_entropy, BlochVector, DecayRates, QubitHamiltonian, SphericalState,
};

fn random_ball_point(rng: &mut StdRng) -> BlochVector {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        if (x * x + y * y + z * z).sqrt() <= 1.0 {
            return BlochVector::new(x, y, z).unwrap();
        }
    }
}

fn random_hamiltonian(rng: &mut StdRng) -> QubitHamiltonian {
    QubitHamiltonian::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

fn random_rates(rng: &mut StdRng) -> DecayRates {
    DecayRates::new(
        rng.random_range(0.0..3.0),
        rng.random_range(0.0..3.0),
        rng.random_range(0.0..3.0),
    )
    .unwrap()
}

/// Pauli components of a traceless Hermitian 2×2 matrix (the derivative
/// image of the Bloch map).
fn bloch_components(m: &Mat2c) -> [f64; 3] {
    [
        2.0 * m.0[0][1].re,
        -2.0 * m.0[0][1].im,
        (m.0[0][0] - m.0[1][1]).re,
    ]
}

fn max_component_dev(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Plain least-squares slope, written independently of the library fit.
fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

#[test]
fn criterion_01_appendix_b_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let rho = bloch_to_density(&random_ball_point(&mut rng));
        let h = random_hamiltonian(&mut rng);
        let rates = random_rates(&mut rng);
        let via_oracle = bloch_components(&gksl_rhs_oracle(&rho, &h, &rates));
        let via_generator = build_generator(&h, &rates).apply(&density_to_bloch(&rho).components());
        worst = worst.max(max_component_dev(&via_oracle, &via_generator));
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-12, "max entrywise deviation {worst}");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "500 oracle comparisons took {elapsed:?}"
    );
    println!("criterion 01 PASS: oracle equivalence, max deviation {worst:.3e} in {elapsed:?}");
}

#[test]
fn criterion_02_isotropic_spectrum() {
    let mut rng = StdRng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let h: f64 = rng.random_range(0.01..3.0);
        let e: [f64; 3] = [
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        ];
        let e_norm = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
        if e_norm < 0.1 {
            continue;
        }
        let l = build_generator(
            &QubitHamiltonian::new(0.0, e[0], e[1], e[2]),
            &DecayRates::isotropic(h).unwrap(),
        );
        let data = eigendecompose(&l).unwrap();
        let expected = [
            Complex64::new(-4.0 * h, 0.0),
            Complex64::new(-4.0 * h, -2.0 * e_norm),
            Complex64::new(-4.0 * h, 2.0 * e_norm),
        ];
        for (lam, want) in data.eigenvalues.iter().zip(expected.iter()) {
            worst = worst.max((lam - want).norm());
        }
    }
    assert!(worst < 1e-10, "max eigenvalue deviation {worst}");

    // the ω₀ = 10, h = 1 pair is −4 ∓ 20i
    let l = build_generator(
        &QubitHamiltonian::z_field(10.0),
        &DecayRates::isotropic(1.0).unwrap(),
    );
    let data = eigendecompose(&l).unwrap();
    assert!((data.eigenvalues[1] - Complex64::new(-4.0, -20.0)).norm() < 1e-10);
    assert!((data.eigenvalues[2] - Complex64::new(-4.0, 20.0)).norm() < 1e-10);
    println!("criterion 02 PASS: isotropic spectrum, max deviation {worst:.3e}");
}

#[test]
fn criterion_03_closed_form_golden_tests() {
    let cases: [(&str, ClosedFormSolution); 5] = [
        (
            "isotropic (1,0,0)",
            ClosedFormSolution::IsotropicX {
                omega0: 10.0,
                h: 1.0,
            },
        ),
        (
            "isotropic (1,0,1)/√2",
            ClosedFormSolution::IsotropicXz {
                omega0: 10.0,
                h: 1.0,
            },
        ),
        (
            "overdamped β=2.5",
            ClosedFormSolution::Overdamped {
                omega0: 10.0,
                h: 50.0,
            },
        ),
        (
            "critical β=1",
            ClosedFormSolution::CriticalPoint { omega0: 10.0 },
        ),
        (
            "z-channel",
            ClosedFormSolution::ZChannel {
                omega0: 5.0,
                h: 1.0,
            },
        ),
    ];
    for (label, form) in cases {
        form.validate().unwrap();
        let (h, rates) = form.configuration();
        let l = build_generator(&h, &rates);
        let traj = sample_trajectory(&l, &form.initial(), 0.0, 1.0, 1001).unwrap();
        let mut worst = 0.0f64;
        for (t, state) in traj.times().iter().zip(traj.states()) {
            let want = form.eval(*t);
            worst = worst.max(max_component_dev(&state.components(), &want.components()));
        }
        assert!(worst < 1e-9, "{label}: max error {worst}");
        println!("criterion 03 PASS: {label} within {worst:.3e}");
    }
}

#[test]
fn criterion_04_regime_classification() {
    let omega0 = 10.0;

    let sub = classify_regime(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(2.0, 0.0, 0.0).unwrap(),
    );
    assert_eq!(sub.regime, Regime::SubCritical);
    let gamma = 1.0 / (1.0 - 0.1f64 * 0.1).sqrt();
    let period = PI * gamma / omega0;
    assert!((sub.period.unwrap() - period).abs() < 1e-12);

    let crit = classify_regime(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(20.0, 0.0, 0.0).unwrap(),
    );
    assert_eq!(crit.regime, Regime::Critical);
    let crit_data = eigendecompose(&build_generator(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(20.0, 0.0, 0.0).unwrap(),
    ))
    .unwrap();
    assert!(
        crit_data.defective,
        "critical spectrum must carry the defective flag"
    );

    let sup = classify_regime(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(50.0, 0.0, 0.0).unwrap(),
    );
    assert_eq!(sup.regime, Regime::SuperCritical);
    let beta: f64 = 2.5;
    let tau_d = (beta + (beta * beta - 1.0).sqrt()) / (2.0 * omega0);
    assert!((sup.tau_d.unwrap() - tau_d).abs() < 1e-12);
    println!("criterion 04 PASS: regimes at h = 2, 20, 50 with exact τ values");
}

#[test]
fn criterion_05_appendix_a_asymptotics() {
    let (omega0, h) = (10.0, 50.0);
    let beta: f64 = h / (2.0 * omega0);
    let tau_d = (beta + (beta * beta - 1.0).sqrt()) / (2.0 * omega0);
    let l = build_generator(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(h, 0.0, 0.0).unwrap(),
    );
    let a0 = BlochVector::new(1.0, 0.0, 0.0).unwrap();
    let traj = sample_trajectory(&l, &a0, 0.0, 10.0 * tau_d, 4001).unwrap();
    let fit = asymptotic_fit(&traj, (5.0 * tau_d, 10.0 * tau_d)).unwrap();
    let expected = 1.0 / tau_d;
    let rel = (fit.rate - expected).abs() / expected;
    assert!(
        rel < 0.01,
        "fitted rate {} vs 1/τ_d {expected} ({rel:.2e})",
        fit.rate
    );
    println!(
        "criterion 05 PASS: asymptotic rate {:.6} vs 1/τ_d {:.6} (rel {:.2e})",
        fit.rate, expected, rel
    );
}

#[test]
fn criterion_06_exceptional_point_sweep() {
    let omega0 = 10.0;
    let betas: Vec<f64> = (0..201).map(|k| 0.9 + 0.2 * k as f64 / 200.0).collect();
    let rows = ep_sweep(omega0, &betas);

    // branches vanish for β ≥ 1
    for row in rows.iter().filter(|r| r.beta >= 1.0) {
        for lam in &row.eigenvalues {
            assert_eq!(lam.im, 0.0, "Im λ ≠ 0 at β = {}", row.beta);
        }
    }

    // |Im λ| ∝ √(1−β) on [0.99, 1)
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows.iter().filter(|r| r.beta >= 0.99 && r.beta < 1.0) {
        let im = row
            .eigenvalues
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0f64, f64::max);
        if im > 0.0 {
            xs.push((1.0 - row.beta).ln());
            ys.push(im.ln());
        }
    }
    assert!(
        xs.len() >= 8,
        "need enough sub-critical points, got {}",
        xs.len()
    );
    let exponent = regression_slope(&xs, &ys);
    assert!(
        (exponent - 0.5).abs() <= 0.02,
        "branch exponent {exponent} not 0.5 ± 0.02"
    );

    // coalescence at the EP
    let at_one = rows
        .iter()
        .find(|r| (r.beta - 1.0).abs() < 1e-9)
        .expect("grid contains β = 1");
    assert!(at_one.coalescence > 0.999);
    assert!(at_one.defective);
    println!(
        "criterion 06 PASS: branch exponent {exponent:.4}, coalescence(1) = {:.6}",
        at_one.coalescence
    );
}

#[test]
fn criterion_07_spherical_cartesian_cross_validation() {
    let mut rng = StdRng::seed_from_u64(107);
    let mut worst_all = 0.0f64;
    for _ in 0..50 {
        let h = QubitHamiltonian::new(
            0.0,
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        );
        let rates = DecayRates::new(
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..2.0),
        )
        .unwrap();
        let s0 = SphericalState::new(
            rng.random_range(0.1..0.98),
            rng.random_range(0.1..PI - 0.1),
            rng.random_range(0.0..2.0 * PI),
        )
        .unwrap();
        let traj = integrate(&s0, &h, &rates, 0.0, 1.0, 1e-9).unwrap();
        let l = build_generator(&h, &rates);
        let a0 = spherical_to_cartesian(&s0);
        let mut worst = 0.0f64;
        for (t, a) in traj.times().iter().zip(traj.cartesian()) {
            let exact = propagate(&l, &a0, *t);
            worst = worst.max(max_component_dev(&a.components(), &exact.components()));
        }
        assert!(worst < 1e-6, "config deviation {worst}");
        worst_all = worst_all.max(worst);
    }

    // one configuration that crosses the θ pole-switch band
    let h = QubitHamiltonian::new(0.0, 5.0, 0.0, 0.001);
    let rates = DecayRates::new(0.02, 0.01, 0.015).unwrap();
    let a0 = BlochVector::new(0.0, 0.0, 0.97).unwrap();
    let (s0, _) = cartesian_to_spherical(&a0);
    let traj = integrate(&s0, &h, &rates, 0.0, 1.0, 1e-9).unwrap();
    assert!(
        traj.switch_events().iter().any(|e| e.to_cartesian)
            && traj.switch_events().iter().any(|e| !e.to_cartesian),
        "pole-band crossing must trigger representation switches"
    );
    let min_theta = traj
        .spherical()
        .iter()
        .map(|s| s.theta())
        .fold(f64::INFINITY, f64::min);
    assert!(min_theta < POLE_SWITCH_ENTER);
    let l = build_generator(&h, &rates);
    let mut worst = 0.0f64;
    for (t, a) in traj.times().iter().zip(traj.cartesian()) {
        let exact = propagate(&l, &a0, *t);
        worst = worst.max(max_component_dev(&a.components(), &exact.components()));
    }
    assert!(worst < 1e-6, "pole-crossing deviation {worst}");
    worst_all = worst_all.max(worst);
    println!("criterion 07 PASS: 50 random + 1 pole-crossing configs agree within {worst_all:.3e}");
}

#[test]
fn criterion_08_dissipation_law() {
    // dlogr ≤ 0 at 10⁵ sampled points
    let mut rng = StdRng::seed_from_u64(108);
    for _ in 0..100_000 {
        let theta = rng.random_range(1e-6..PI - 1e-6);
        let phi = rng.random_range(0.0..2.0 * PI);
        let rates = random_rates(&mut rng);
        let s = SphericalState::new(0.5, theta, phi).unwrap();
        let rhs = spherical_rhs(&s, &QubitHamiltonian::zero(), &rates).unwrap();
        assert!(
            rhs.dlogr <= 0.0,
            "dlogr = {} at θ={theta}, φ={phi}",
            rhs.dlogr
        );
    }

    // dlogr is Hamiltonian-independent: 100 random substitutions
    let s = SphericalState::new(0.7, 1.1, 2.3).unwrap();
    let rates = DecayRates::new(0.4, 1.2, 0.3).unwrap();
    let reference = spherical_rhs(&s, &QubitHamiltonian::zero(), &rates)
        .unwrap()
        .dlogr;
    for _ in 0..100 {
        let h = random_hamiltonian(&mut rng);
        let dlogr = spherical_rhs(&s, &h, &rates).unwrap().dlogr;
        assert_eq!(dlogr, reference);
    }

    // entropy non-decreasing along integrated trajectories (1e−10 slack)
    for trial in 0..10 {
        let h = random_hamiltonian(&mut rng);
        let rates = random_rates(&mut rng);
        let s0 = SphericalState::new(
            rng.random_range(0.2..0.98),
            rng.random_range(0.2..PI - 0.2),
            rng.random_range(0.0..2.0 * PI),
        )
        .unwrap();
        let traj = integrate(&s0, &h, &rates, 0.0, 1.5, 1e-10).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for s in traj.spherical() {
            let entropy = von_neumann_entropy(s.r()).unwrap();
            assert!(
                entropy >= prev - 1e-10,
                "trial {trial}: entropy dropped {prev} → {entropy}"
            );
            prev = entropy;
        }
    }
    println!(
        "criterion 08 PASS: dissipation law (10⁵ points, 100 H substitutions, 10 trajectories)"
    );
}

#[test]
fn criterion_09_trajectory_invariant() {
    use lindbloch::spherical_dynamics::{diagonal_closed_form, trajectory_invariant};
    let (h1, h3) = (0.3, 1.1);
    let h = QubitHamiltonian::z_field(1.0); // H = σ₃
    let rates = DecayRates::new(h1, h1, h3).unwrap();
    let s0 = SphericalState::new(0.9, 1.1 * PI / 4.0, 0.3).unwrap();
    let reference = trajectory_invariant(&s0, h1, h3).unwrap();

    let form = diagonal_closed_form(&h, &rates, &s0, 0.0).unwrap();
    let mut worst_closed = 0.0f64;
    for k in 0..=100 {
        let t = 2.0 * k as f64 / 100.0;
        let v = trajectory_invariant(&form.eval(t), h1, h3).unwrap();
        worst_closed = worst_closed.max((v - reference).abs() / reference.abs());
    }
    assert!(worst_closed < 1e-6, "closed-form drift {worst_closed}");

    let traj = integrate(&s0, &h, &rates, 0.0, 2.0, 1e-10).unwrap();
    let mut worst_num = 0.0f64;
    for s in traj.spherical() {
        let v = trajectory_invariant(s, h1, h3).unwrap();
        worst_num = worst_num.max((v - reference).abs() / reference.abs());
    }
    assert!(worst_num < 1e-6, "integrated drift {worst_num}");
    println!(
        "criterion 09 PASS: invariant drift closed-form {worst_closed:.3e}, integrated {worst_num:.3e}"
    );
}

#[test]
fn criterion_10_fixed_points_and_stability() {
    let (omega0, hrate) = (5.0, 1.0);
    let l = build_generator(
        &QubitHamiltonian::z_field(omega0),
        &DecayRates::new(0.0, 0.0, hrate).unwrap(),
    );
    let fps = fixed_points(&l);
    assert_eq!(fps.kind, FixedPointKind::Line);
    assert!((fps.basis[0][2] - 1.0).abs() < 1e-12);
    assert!(fps.basis[0][0].abs() < 1e-12 && fps.basis[0][1].abs() < 1e-12);

    let report = stability(&l, &fps);
    let expected = [
        Complex64::new(0.0, 0.0),
        Complex64::new(-2.0 * hrate, -2.0 * omega0),
        Complex64::new(-2.0 * hrate, 2.0 * omega0),
    ];
    for (lam, want) in report.eigenvalues.iter().zip(expected.iter()) {
        assert!((lam - want).norm() < 1e-10, "{lam} vs {want}");
    }

    // a₃ conserved along propagation
    let inv = 1.0 / 2.0f64.sqrt();
    let a0 = BlochVector::new(inv, 0.0, inv).unwrap();
    let traj = sample_trajectory(&l, &a0, 0.0, 1.0, 1001).unwrap();
    for state in traj.states() {
        assert!((state.a3() - inv).abs() <= 1e-12);
    }

    // 100 random initial states converge to the line
    let mut rng = StdRng::seed_from_u64(110);
    let horizon = 20.0 / (2.0 * hrate);
    for _ in 0..100 {
        let a = random_ball_point(&mut rng);
        let end = propagate(&l, &a, horizon);
        let dist = (end.a1() * end.a1() + end.a2() * end.a2()).sqrt();
        assert!(dist < 1e-6, "distance to line {dist}");
        assert!((end.a3() - a.a3()).abs() < 1e-9);
    }

    // analogous x-axis and y-axis parameter sets
    let lx = build_generator(
        &QubitHamiltonian::new(0.0, 2.0, 0.0, 0.0),
        &DecayRates::new(0.7, 0.0, 0.0).unwrap(),
    );
    let fx = fixed_points(&lx);
    assert_eq!(fx.kind, FixedPointKind::Line);
    assert!((fx.basis[0][0] - 1.0).abs() < 1e-12);

    let ly = build_generator(
        &QubitHamiltonian::new(0.0, 0.0, 2.0, 0.0),
        &DecayRates::new(0.0, 0.7, 0.0).unwrap(),
    );
    let fy = fixed_points(&ly);
    assert_eq!(fy.kind, FixedPointKind::Line);
    assert!((fy.basis[0][1] - 1.0).abs() < 1e-12);
    println!("criterion 10 PASS: fixed lines on all three axes with exact Jacobian spectra");
}

#[test]
fn criterion_11_critical_decays_fastest() {
    let omega0 = 10.0;
    let a0 = BlochVector::new(1.0, 0.0, 0.0).unwrap();
    let norm_at = |h: f64| {
        let l = build_generator(
            &QubitHamiltonian::z_field(omega0),
            &DecayRates::new(h, 0.0, 0.0).unwrap(),
        );
        propagate(&l, &a0, 0.5).norm()
    };
    let sub = norm_at(2.0); // β = 0.1
    let critical = norm_at(20.0); // β = 1
    let sup = norm_at(50.0); // β = 2.5
    assert!(
        critical < sub && critical < sup,
        "critical {critical} not smallest (sub {sub}, super {sup})"
    );
    println!("criterion 11 PASS: ‖a(0.5)‖ = {critical:.3e} (critical) < {sub:.3e}, {sup:.3e}");
}

#[test]
fn criterion_12_cli_contract() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_lindbloch");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    // example 1: isotropic, method both
    let cfg1 = path("iso.json");
    std::fs::write(
        &cfg1,
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [1, 1, 1],
            "initial": {"bloch": [1, 0, 0]},
            "time": {"t0": 0, "t1": 1, "samples": 1001}, "method": "both"}"#,
    )
    .unwrap();
    let csv1 = path("iso.csv");
    let status = Command::new(bin)
        .args(["simulate", "--config", &cfg1, "--csv", &csv1])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let body = std::fs::read_to_string(&csv1).unwrap();
    let header = body.lines().next().unwrap();
    assert_eq!(header, "t,a1,a2,a3,r,theta,phi,winding,entropy,discrepancy");
    let row_100: Vec<&str> = body.lines().nth(101).unwrap().split(',').collect();
    let t: f64 = row_100[0].parse().unwrap();
    assert!((t - 0.1).abs() < 1e-15);
    let a1: f64 = row_100[1].parse().unwrap();
    let expected = (-0.4f64).exp() * 2.0f64.cos();
    assert!((a1 - expected).abs() < 1e-8, "a1(0.1) = {a1} vs {expected}");
    for line in body.lines().skip(1) {
        let disc: f64 = line.split(',').nth(9).unwrap().parse().unwrap();
        assert!(disc < 1e-6, "discrepancy {disc}");
    }

    // byte-identical on rerun
    let csv1b = path("iso2.csv");
    Command::new(bin)
        .args(["simulate", "--config", &cfg1, "--csv", &csv1b])
        .status()
        .unwrap();
    assert_eq!(
        std::fs::read(&csv1).unwrap(),
        std::fs::read(&csv1b).unwrap(),
        "CSV must be byte-identical across runs"
    );

    // example 2: negative decay rejected with exit 2 naming the field
    let cfg2 = path("bad.json");
    std::fs::write(
        &cfg2,
        r#"{"hamiltonian": {"e": [0, 0, 10]}, "decay": [-1, 0, 0],
            "initial": {"bloch": [1, 0, 0]}}"#,
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["simulate", "--config", &cfg2])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("decay[0] must be ≥ 0"), "stderr: {stderr}");

    // example 3: z-channel keeps the a3 column constant
    let cfg3 = path("zchan.json");
    std::fs::write(
        &cfg3,
        r#"{"hamiltonian": {"e": [0, 0, 5]}, "decay": [0, 0, 1],
            "initial": {"bloch": [0.7071067811865476, 0, 0.7071067811865476]}}"#,
    )
    .unwrap();
    let csv3 = path("zchan.csv");
    let status = Command::new(bin)
        .args(["simulate", "--config", &cfg3, "--csv", &csv3])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let body = std::fs::read_to_string(&csv3).unwrap();
    for line in body.lines().skip(1) {
        let a3: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((a3 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    // exit 4 on unwritable output
    let out = Command::new(bin)
        .args([
            "simulate",
            "--config",
            &cfg3,
            "--csv",
            &path("no_such_dir/out.csv"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // validate: 0 on good, 2 on bad
    assert_eq!(
        Command::new(bin)
            .args(["validate", "--config", &cfg1])
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    assert_eq!(
        Command::new(bin)
            .args(["validate", "--config", &cfg2])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    println!("criterion 12 PASS: CLI contract (outputs, determinism, exit codes 0/2/4)");
}

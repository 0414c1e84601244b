use num_complex::Complex64;
use wavecross_core::greens::*;

fn settings(k_max: f64, n_nodes: usize) -> QuadratureSettings {
    QuadratureSettings {
        k_max,
        n_nodes,
        epsilon: 0.0,
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn quadrature_matches_closed_form() {
    let q = green_quadrature(2.0, -0.5, 1.0, &settings(100.0, 1_000_000)).unwrap();
    let exact = green_closed_form(2.0, -0.5, 1.0).unwrap();
    assert!(rel(q.value, exact) < 1e-6, "{:e}", rel(q.value, exact));
    let at_origin = green_quadrature(0.0, -0.5, 1.0, &settings(100.0, 1000)).unwrap();
    assert!(rel(at_origin.value, Complex64::new(-1.0, 0.0)) < 1e-6);
}

#[test]
fn quadrature_self_convergence() {
    let coarse = green_quadrature(3.0, -2.0, 1.0, &settings(80.0, 20_000))
        .unwrap()
        .value;
    let fine = green_quadrature(3.0, -2.0, 1.0, &settings(80.0, 40_000))
        .unwrap()
        .value;
    assert!(rel(coarse, fine) < 1e-8);
}

#[test]
fn convergence_in_cutoff_is_monotone() {
    let (energy, x) = (-0.5, 1.5);
    let kap = kappa(energy, 1.0).unwrap();
    let exact = green_closed_form(x, energy, 1.0).unwrap();
    let errors: Vec<f64> = [20.0, 40.0, 80.0, 160.0, 320.0]
        .iter()
        .map(|f| {
            rel(
                green_quadrature(x, energy, 1.0, &settings(f * kap, 100_000))
                    .unwrap()
                    .value,
                exact,
            )
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{errors:?}");
    }
    assert!(errors[4] < 1e-8, "{errors:?}");
}

#[test]
fn decay_rate_sweep() {
    let energies: Vec<f64> = (0..=12)
        .map(|i| -10f64.powf(1.0 - 3.0 * i as f64 / 12.0))
        .collect();
    for e in energies {
        let kap = kappa(e, 1.0).unwrap();
        let xs = linspace(0.5 / kap, 6.5 / kap, 12);
        let s = settings(40.0 * kap, 20_000);
        let eval = green_eval(e, 1.0, &xs, GreenMethod::Quadrature, &s).unwrap();
        let fit = eval.decay.unwrap();
        assert!(
            (fit.kappa / kap - 1.0).abs() < 1e-3,
            "E={e}: {} vs {kap}",
            fit.kappa
        );
        let exact = green_eval(e, 1.0, &xs, GreenMethod::ClosedForm, &s).unwrap();
        assert!((exact.decay.unwrap().kappa / kap - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_properties() {
    assert_eq!(kappa(-0.5, 1.0).unwrap(), 1.0);
    assert!((kappa(-2.0, 1.0).unwrap() / kappa(-0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(kappa(0.0, 1.0).is_err());
    assert!(kappa(-1e-12, 1.0).unwrap() < 1e-5);
    let k = kappa(-1.3, 2.0).unwrap();
    let (g1, g2) = (
        green_closed_form(0.7, -1.3, 2.0).unwrap(),
        green_closed_form(2.9, -1.3, 2.0).unwrap(),
    );
    assert!(((g2.re / g1.re).ln() / (0.7 - 2.9) - k).abs() < 1e-12);
    assert_eq!(
        green_closed_form(-1.1, -1.3, 2.0).unwrap(),
        green_closed_form(1.1, -1.3, 2.0).unwrap()
    );
    assert!((green_closed_form(0.0, -1.3, 2.0).unwrap().re + 2.0 / k).abs() < 1e-15);
}

#[test]
fn pole_structure() {
    let bound = max_inverse_denominator(-0.5, 1.0, 50.0, 100_000);
    assert!((bound - 2.0).abs() < 1e-12);
    assert!(real_axis_poles(-0.5, 1.0, 50.0, 10_001).is_empty());
    let poles = real_axis_poles(2.0, 1.0, 50.0, 10_001);
    assert_eq!(poles.len(), 2);
    assert!((poles[0] + 2.0).abs() < 1e-12 && (poles[1] - 2.0).abs() < 1e-12);
    let [p, _] = pole_momenta(-0.5, 1.0, 0.0);
    assert!((p - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    // The imaginary-momentum pole is the bound-state decay constant.
    let well = DeltaWell::new(0.8, 1.5).unwrap();
    let [p, _] = pole_momenta(well.energy(), 1.5, 0.0);
    assert!((p.im - well.kappa()).abs() < 1e-14 && p.re.abs() < 1e-14);
}

#[test]
fn positive_energy_is_oscillatory() {
    let (e, m) = (2.0f64, 1.0f64);
    let p0 = (2.0 * m * e).sqrt();
    let mags: Vec<f64> = linspace(1.0, 50.0, 50)
        .iter()
        .map(|&x| green_positive_energy(x, e, m, 1e-8).unwrap().norm())
        .collect();
    let (lo, hi) = mags
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo - 1.0 < 1e-5);

    // Phase advances by 2π per wavelength 2π/p₀.
    let xs = linspace(10.0, 10.0 + 2.0 * std::f64::consts::PI / p0, 400);
    let mut winding = 0.0;
    for w in xs.windows(2) {
        let a = green_positive_energy(w[0], e, m, 1e-8).unwrap();
        let b = green_positive_energy(w[1], e, m, 1e-8).unwrap();
        winding += (b / a).arg();
    }
    assert!((winding / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-6);

    // Envelope decay rate ≈ εm/p₀, linear in ε.
    let rate = |eps: f64| {
        let (a, b) = (
            green_positive_energy(10.0, e, m, eps).unwrap(),
            green_positive_energy(60.0, e, m, eps).unwrap(),
        );
        (a.norm() / b.norm()).ln() / 50.0
    };
    let (r1, r2) = (rate(1e-3), rate(2e-3));
    assert!((r1 / (1e-3 * m / p0) - 1.0).abs() < 1e-5);
    assert!((r2 / r1 - 2.0).abs() < 1e-5);
    assert!(green_positive_energy(1.0, e, m, 0.0).is_err());
}

#[test]
fn positive_energy_quadrature_matches_contour_result() {
    let s = QuadratureSettings {
        k_max: 200.0,
        n_nodes: 200_000,
        epsilon: 0.05,
    };
    for x in [0.5, 2.0, 5.0] {
        let q = green_quadrature(x, 2.0, 1.0, &s).unwrap().value;
        let exact = green_positive_energy(x, 2.0, 1.0, 0.05).unwrap();
        assert!(rel(q, exact) < 1e-6, "x={x}: {q} vs {exact}");
    }
    assert!(green_quadrature(1.0, 2.0, 1.0, &QuadratureSettings { epsilon: 0.0, ..s }).is_err());
}

#[test]
fn delta_well_far_field_is_exact() {
    let probes = linspace(0.2, 8.0, 40);
    let report = delta_well_farfield_check(1.3, 0.7, &probes).unwrap();
    assert!(report.max_ratio_deviation < 1e-10);
    assert!(report.max_integral_residual < 1e-10);
    assert!((report.tail_kappa_fit / report.kappa - 1.0).abs() < 1e-3);
    let neg: Vec<f64> = probes.iter().map(|x| -x).collect();
    assert!(
        delta_well_farfield_check(1.3, 0.7, &neg)
            .unwrap()
            .max_ratio_deviation
            < 1e-10
    );
    let touching = linspace(0.0, 4.0, 10);
    assert!(delta_well_farfield_check(1.3, 0.7, &touching).is_err());
}

#[test]
fn square_well_far_field() {
    let well = SquareWell::ground_state(2.0, 1.0, 1.0).unwrap();
    // scipy brentq on z·tan z = √(1 − z²): z = 0.7390851332151607.
    assert!(
        (well.energy - (-0.9075063317206565)).abs() < 1e-11,
        "{}",
        well.energy
    );
    assert_eq!(well.bound_state_count(), 1);
    let probes = linspace(3.0, 10.0, 30);
    let report = square_well_farfield_check(2.0, 1.0, 1.0, &probes).unwrap();
    assert!(report.max_ratio_deviation < 0.01);
    assert!(
        report.max_integral_residual < 1e-8,
        "{}",
        report.max_integral_residual
    );
    assert!((report.tail_kappa_fit / report.kappa - 1.0).abs() < 1e-3);
    // Inside the well the integral equation still holds.
    for x in [0.0, 0.2, -0.45] {
        let rebuilt = well.lippmann_schwinger(x).unwrap();
        assert!((rebuilt / well.wavefunction(x) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn decay_fit_robustness() {
    let xs = linspace(0.5, 5.0, 40);
    let values: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::new((-2.0 * x).exp() * (1.0 + 0.01 * x.cos()), 0.0))
        .collect();
    let fit = fit_decay_rate(&xs, &values).unwrap();
    assert!((fit.kappa / 2.0 - 1.0).abs() < 0.005, "{}", fit.kappa);
    let mixed = linspace(-2.0, 2.0, 10);
    let mv: Vec<Complex64> = mixed
        .iter()
        .map(|x| Complex64::new((-x.abs()).exp(), 0.0))
        .collect();
    assert!(fit_decay_rate(&mixed, &mv).is_err());
    let tiny = vec![Complex64::new(1e-310, 0.0); 10];
    assert!(fit_decay_rate(&linspace(1.0, 10.0, 10), &tiny).is_err());
}

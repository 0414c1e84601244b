use std::f64::consts::PI;

use num_complex::Complex64;
use wavecross_core::analytic::{gaussian_density_1d, sigma_t};
use wavecross_core::grid::{make_grid, Geometry, Wavefunction};
use wavecross_core::propagator::*;
use wavecross_core::step_state::imaging_density;

fn density_l2_error(state: &Wavefunction, reference: impl Fn(f64) -> f64) -> f64 {
    let (num, den) = state
        .samples
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (j, z)| {
            let exact = reference(state.grid.x(j));
            (n + (z.norm_sqr() - exact).powi(2), d + exact * exact)
        });
    (num / den).sqrt()
}

#[test]
fn free_gaussian_matches_spreading_law() {
    let grid = make_grid(40.0, 4096).unwrap();
    let psi = initialize_gaussian(&grid, 0.0, 1.0, 0.0).unwrap();
    let out = evolve(&psi, &Potential::Free, &EvolutionSpec::strang(2.0, 2000)).unwrap();
    let s = sigma_t(1.0, 1.0, 2.0, 1.0).unwrap();
    assert!((s - 2f64.sqrt()).abs() < 1e-15);
    let err = density_l2_error(&out.state, |x| gaussian_density_1d(x, 0.0, s));
    assert!(err < 1e-6, "relative L2 error {err:e}");
    assert!((out.state.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn exact_free_width_semigroup_and_reversal() {
    let grid = make_grid(64.0, 4096).unwrap();
    let psi = initialize_gaussian(&grid, 1.5, 1.0, 0.3).unwrap();
    let t = 3.0;
    let direct = evolve_free_exact(&psi, t).unwrap();
    let s = sigma_t(1.0, 1.0, t, 1.0).unwrap();
    assert!((direct.variance_position().sqrt() - s).abs() < 1e-10);

    let two_step = evolve_free_exact(&evolve_free_exact(&psi, 1.2).unwrap(), 1.8).unwrap();
    assert!(two_step.relative_l2_distance(&direct).unwrap() < 1e-12);

    // Run forward, conjugate, run forward again, conjugate back.
    let back = evolve_free_exact(&direct.conjugate(), t)
        .unwrap()
        .conjugate();
    assert!(back.relative_l2_distance(&psi).unwrap() < 1e-12);
}

#[test]
fn strang_error_is_second_order() {
    let grid = make_grid(32.0, 1024).unwrap();
    let psi = initialize_gaussian(&grid, 0.0, 1.0, 0.0).unwrap();
    let v = Potential::SoftenedPointSource {
        coupling: 2.0,
        center: 0.5,
        softening: 1.0,
    };
    let t = 1.0;
    let reference = evolve(&psi, &v, &EvolutionSpec::strang(t, 4096))
        .unwrap()
        .state;
    let errors: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            evolve(&psi, &v, &EvolutionSpec::strang(t, n))
                .unwrap()
                .state
                .relative_l2_distance(&reference)
                .unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 2.0).abs() < 0.15,
            "observed order {order}, errors {errors:?}"
        );
    }
}

#[test]
fn unitarity_over_many_steps() {
    let grid = make_grid(64.0, 1024).unwrap();
    let psi = initialize_gaussian(&grid, -5.0, 1.0, 0.0).unwrap();
    let catalogue = [
        Potential::Free,
        Potential::uniform(0.05),
        Potential::SoftenedPointSource {
            coupling: 3.0,
            center: 0.0,
            softening: 0.5,
        },
        Potential::DeltaWell { strength: 1.0 },
        Potential::SquareWell {
            depth: 2.0,
            width: 2.0,
        },
    ];
    for v in catalogue {
        let out = evolve(&psi, &v, &EvolutionSpec::strang(5.0, 10_000)).unwrap();
        assert!(
            (out.state.norm() - 1.0).abs() < 1e-10,
            "{v:?}: {}",
            out.state.norm()
        );
    }
}

#[test]
fn uniform_field_centroid_and_width() {
    let grid = make_grid(48.0, 2048).unwrap();
    let x0 = 3.0;
    let psi = initialize_gaussian(&grid, x0, 1.0, 0.0).unwrap();
    let (g, t) = (0.75, 2.5);
    let pushed = evolve(&psi, &Potential::uniform(g), &EvolutionSpec::strang(t, 500))
        .unwrap()
        .state;
    let free = evolve(&psi, &Potential::Free, &EvolutionSpec::strang(t, 500))
        .unwrap()
        .state;
    let displacement = pushed.expectation_position() - x0;
    let expected = -0.5 * g * t * t;
    assert!(
        (displacement / expected - 1.0).abs() < 1e-8,
        "{displacement} vs {expected}"
    );
    assert!((pushed.variance_position() / free.variance_position() - 1.0).abs() < 1e-8);
}

#[test]
fn step_state_far_field_matches_imaging() {
    // dx = R/64; momenta up to Nyquist travel at most π·t/dx < half-width.
    let grid = make_grid(4096.0, 524_288).unwrap();
    let psi = initialize_step_radial(&grid, 1.0).unwrap();
    let t = 20.0; // 10 spreading times 2mR²/ħ
    let out = evolve_free_exact(&psi, t).unwrap();
    let numeric = radial_density(&out);
    let period = PI * t;
    let mut start = 10.0 * t;
    while start + period < 30.0 * t {
        let window: Vec<&(f64, f64)> = numeric
            .iter()
            .filter(|(r, _)| *r >= start && *r < start + period)
            .collect();
        let num_avg = window.iter().map(|(_, d)| d).sum::<f64>() / window.len() as f64;
        let img_avg = window
            .iter()
            .map(|(r, _)| imaging_density(*r, t, 1.0).unwrap())
            .sum::<f64>()
            / window.len() as f64;
        assert!(
            (num_avg / img_avg - 1.0).abs() < 0.05,
            "window at {start}: {num_avg:e} vs {img_avg:e}"
        );
        start += period;
    }
}

#[test]
fn gaussian_stay_amplitude_formula() {
    let grid = make_grid(64.0, 2048).unwrap();
    let psi = initialize_gaussian(&grid, 0.0, 1.0, 0.0).unwrap();
    let out = evolve_free_exact(&psi, 3.0).unwrap();
    let o = overlap(&psi, &out).unwrap();
    assert!((o - gaussian_free_stay_amplitude(1.0, 3.0)).norm() < 1e-12);
}

#[test]
fn radial_norm_uses_positive_half() {
    let grid = make_grid(16.0, 4096).unwrap();
    let psi = initialize_step_radial(&grid, 1.0).unwrap();
    let full: f64 = psi.samples.iter().map(|z| z.norm_sqr() * grid.dx).sum();
    assert!((full - 2.0 * psi.norm()).abs() < 1e-12);
    let odd = (1..grid.n_points / 2).all(|j| {
        let a = psi.samples[grid.origin_index() + j];
        let b = psi.samples[grid.origin_index() - j];
        (a + b).norm() < 1e-15
    });
    assert!(odd);
    let _ = Wavefunction::from_fn(grid, Geometry::Radial, |_| Complex64::new(0.0, 0.0)).unwrap();
}

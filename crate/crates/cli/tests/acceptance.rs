//! Acceptance criteria 1–8, one PASS/FAIL line each.
//!
//! Run with `cargo test -p wavecross-cli --test acceptance`.

use std::io::Write;
use std::time::Instant;

use serde_json::{Map, Value};
use wavecross_cli::commands::run_job;
use wavecross_cli::config::Job;
use wavecross_core::analytic::{gaussian_density_1d, sigma_t};
use wavecross_core::entanglement::*;
use wavecross_core::greens::*;
use wavecross_core::grid::make_grid;
use wavecross_core::model::{ATOMIC_MASS_UNIT, HBAR, SPEED_OF_LIGHT};
use wavecross_core::propagator::{evolve, initialize_gaussian, EvolutionSpec, Potential};
use wavecross_core::step_state::{log_cutoffs, momentum_scan, InitialState};

type Criterion = (&'static str, f64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn job(name: &str, toml_text: &str) -> Map<String, Value> {
    let table: toml::Table = toml::from_str(toml_text).unwrap();
    run_job(&Job::from_table(name, table).unwrap())
        .unwrap()
        .summary
}

fn f(summary: &Map<String, Value>, key: &str) -> f64 {
    summary[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing from {summary:?}"))
}

fn drift() -> Outcome {
    let s = job("drift", "M = 1e-14\nd = 2e-4\nt = 2.0");
    let ratio = f(&s, "ratio");
    check(
        (1.0e-13..=3.0e-13).contains(&ratio),
        format!("δx/d = {ratio:.6e} (want [1e-13, 3e-13])"),
    )
}

fn gaussian_spreading() -> Outcome {
    let grid = make_grid(40.0, 4096).unwrap();
    let psi = initialize_gaussian(&grid, 0.0, 1.0, 0.0).unwrap();
    let out = evolve(&psi, &Potential::Free, &EvolutionSpec::strang(2.0, 2000))
        .unwrap()
        .state;
    let s = sigma_t(1.0, 1.0, 2.0, 1.0).unwrap();
    let (num, den) = out
        .samples
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (j, z)| {
            let exact = gaussian_density_1d(grid.x(j), 0.0, s);
            (n + (z.norm_sqr() - exact).powi(2), d + exact * exact)
        });
    let err = (num / den).sqrt();
    check(
        err < 1e-6,
        format!("relative L2 density error {err:.3e} (want < 1e-6)"),
    )
}

fn divergence_verdicts() -> Outcome {
    let step = job(
        "step-scan",
        "state = \"step\"\nk-min = 10.0\nk-max = 10000.0",
    );
    let incs: Vec<f64> = step["decade_increments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let mean = incs.iter().sum::<f64>() / incs.len() as f64;
    let worst = incs
        .iter()
        .map(|v| (v / mean - 1.0).abs())
        .fold(0.0, f64::max);
    let step_ok = incs.len() == 3 && worst < 0.1 && step["verdict"] == "log-divergent";

    let cutoffs = log_cutoffs(10.0, 1e4, 8);
    let g = momentum_scan(1, InitialState::Gaussian { radius: 1.0 }, &cutoffs).unwrap();
    let g_incs: Vec<f64> = g
        .cutoffs
        .windows(2)
        .zip(g.values.windows(2))
        .map(|(_, v)| v[1] - v[0])
        .collect();
    let g_ratio = g_incs.iter().map(|d| d.abs()).fold(0.0, f64::max) / g.values[0];
    let g_ok = g_ratio < 1e-6;
    check(
        step_ok && g_ok,
        format!(
            "step decade increments {incs:.4?} (max deviation {:.2}% < 10%); Gaussian max increment / first value {g_ratio:.1e} (< 1e-6)",
            100.0 * worst
        ),
    )
}

fn imaging_tail() -> Outcome {
    let s = job("imaging", "compare-evolution = true");
    let slope = f(&s, "tail_slope");
    let deviation = f(&s, "evolution_max_window_deviation");
    check(
        (slope + 4.0).abs() <= 0.2 && deviation < 0.05,
        format!(
            "tail slope {slope:.4} (want −4 ± 0.2); imaging vs evolution {:.2}% (< 5%)",
            100.0 * deviation
        ),
    )
}

fn ehrenfest() -> Outcome {
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
    let expected = -0.5 * g * t * t;
    let centroid = ((pushed.expectation_position() - x0) / expected - 1.0).abs();
    let variance = (pushed.variance_position() / free.variance_position() - 1.0).abs();
    check(
        centroid < 1e-8 && variance < 1e-8,
        format!(
            "centroid rel. error {centroid:.2e}, variance rel. error {variance:.2e} (both < 1e-8)"
        ),
    )
}

fn entanglement_structure() -> Outcome {
    let base = "m = 1e-14\nd = 2e-4\n";
    let no_source = job("alpha", &format!("{base}M = 0.0\nt = 2.0"));
    let no_time = job("alpha", &format!("{base}M = 1e-14\nt = 0.0"));
    let (d_m0, d_t0) = (f(&no_source, "det_abs"), f(&no_time, "det_abs"));

    let heavy = job("alpha", &format!("{base}M = 1e-14\nt = 2.0"));
    let log10 = f(&heavy, "log10_cross_abs");
    let verdict = heavy["verdicts"]["crossed_channel"]
        .as_str()
        .unwrap_or("?")
        .to_string();

    let settings = AmplitudeSettings::default();
    let mut residual = f(&heavy, "cross_fit_residual");
    for t in [0.0, 1.0, 4.0] {
        let config = BranchConfig::symmetric(30.0, 20.0, 1.0).unwrap();
        let profile = CrossedProfile::new(
            &config,
            &GravityCoupling::none(),
            t,
            FieldModel::Uniform,
            &settings,
        )
        .unwrap();
        residual = residual.max(
            profile
                .crossed(config.separation(), 25)
                .unwrap()
                .fit_residual,
        );
    }
    check(
        d_m0 < 1e-12 && d_t0 < 1e-12 && residual < 0.01 && log10 < -100.0 && verdict == "negligible",
        format!(
            "|D| = {d_m0:.1e} (M=0), {d_t0:.1e} (t=0); worst quadratic fit residual {:.3}%; heavy pair log10|O| = {log10:.2}, verdict {verdict}",
            100.0 * residual
        ),
    )
}

fn green_suite() -> Outcome {
    let s = |k_max, n_nodes| QuadratureSettings {
        k_max,
        n_nodes,
        epsilon: 0.0,
    };
    let q = green_quadrature(2.0, -0.5, 1.0, &s(100.0, 1_000_000))
        .unwrap()
        .value;
    let exact = green_closed_form(2.0, -0.5, 1.0).unwrap();
    let quad_err = (q - exact).norm() / exact.norm();

    let mut kappa_err: f64 = 0.0;
    for i in 0..=12 {
        let e = -10f64.powf(1.0 - 3.0 * i as f64 / 12.0);
        let kap = kappa(e, 1.0).unwrap();
        let xs = linspace(0.5 / kap, 6.5 / kap, 12);
        let fit = green_eval(e, 1.0, &xs, GreenMethod::Quadrature, &s(40.0 * kap, 20_000))
            .unwrap()
            .decay
            .unwrap();
        kappa_err = kappa_err.max((fit.kappa / kap - 1.0).abs());
    }

    let delta = delta_well_farfield_check(1.3, 0.7, &linspace(0.2, 8.0, 40))
        .unwrap()
        .max_ratio_deviation;
    // Well of width 1: probes start at three widths.
    let square = square_well_farfield_check(2.0, 1.0, 1.0, &linspace(3.0, 10.0, 30))
        .unwrap()
        .max_ratio_deviation;
    check(
        quad_err < 1e-6 && kappa_err < 1e-3 && delta < 1e-10 && square < 0.01,
        format!(
            "quadrature rel. error {quad_err:.1e}; worst κ deviation {:.4}% over E ∈ [−10, −0.01]; delta ratio {delta:.1e}; square-well ratio {:.3}%",
            100.0 * kappa_err,
            100.0 * square
        ),
    )
}

fn relativistic() -> Outcome {
    let compton = HBAR / (ATOMIC_MASS_UNIT * SPEED_OF_LIGHT);
    let fractions: Vec<f64> = [10.0, 100.0, 1e4, 1e8]
        .iter()
        .map(|k| {
            let s = job("step-scan", &format!("R = {:e}", k * compton));
            f(
                s["relativistic"].as_object().unwrap(),
                "probability_fraction",
            )
        })
        .collect();
    let step_ok = fractions.iter().all(|&p| p > 0.0) && fractions.windows(2).all(|w| w[1] < w[0]);
    let g = job("step-scan", "state = \"gaussian\"\nR = 1e-6");
    let gauss = f(
        g["relativistic"].as_object().unwrap(),
        "probability_fraction",
    );
    check(
        step_ok && gauss < 1e-10,
        format!(
            "step fractions at R/λ_C = 1e1, 1e2, 1e4, 1e8: {}; Gaussian at R = 1 μm: {gauss:.1e}",
            fractions
                .iter()
                .map(|p| format!("{p:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("drift reproduction", 1.0, drift),
        ("Gaussian spreading oracle", 10.0, gaussian_spreading),
        ("divergence verdicts", 30.0, divergence_verdicts),
        ("imaging-theorem tail", 60.0, imaging_tail),
        ("Ehrenfest exactness", 10.0, ehrenfest),
        (
            "entanglement criterion structure",
            120.0,
            entanglement_structure,
        ),
        ("Green's function suite", 60.0, green_suite),
        ("relativistic diagnostic", 10.0, relativistic),
    ];
    let mut failed = Vec::new();
    writeln!(std::io::stdout()).unwrap();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = outcome.pass && secs < *limit;
        // Written past the test harness capture so the lines always show.
        writeln!(
            std::io::stdout(),
            "criterion {} {} {name}: {} [{secs:.2} s, limit {limit} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        )
        .unwrap();
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

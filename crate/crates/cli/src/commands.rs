use std::f64::consts::PI;

use serde_json::{json, Map, Value};
use wavecross_core::analytic::{drift_report, gaussian_density, sigma_t, spreading_speed};
use wavecross_core::entanglement::{entanglement_report, scaled_setup, AmplitudeSettings, Branch};
use wavecross_core::greens::{self, GreenMethod, QuadratureSettings};
use wavecross_core::grid::make_grid;
use wavecross_core::model::{PhysicalParams, ScaledUnits, HBAR};
use wavecross_core::propagator::{
    evolve as evolve_state, evolve_free_exact, initialize_gaussian, initialize_step_radial,
    radial_density, EvolutionSpec, Potential,
};
use wavecross_core::step_state::{
    imaging_density, imaging_tail_slope, log_cutoffs, momentum_scan, radial_scan,
    relativistic_fraction, CutoffScan, DivergenceVerdict, InitialState,
};

use crate::config::*;
use crate::error::{CliError, Result};
use crate::output::{number, Artifact, Table};
use crate::sweep;

pub fn run_job(job: &Job) -> Result<Artifact> {
    match job {
        Job::Drift(p) => drift(p),
        Job::Spread(p) => spread(p),
        Job::StepScan(p) => step_scan(p),
        Job::Imaging(p) => imaging(p),
        Job::Evolve(p) => evolve(p),
        Job::Alpha(p) => alpha(p),
        Job::Green(p) => green(p),
        Job::Sweep { sweep, target } => sweep::run(sweep, target),
    }
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn drift(p: &DriftParams) -> Result<Artifact> {
    let params = PhysicalParams::new(p.m, p.source_mass, p.d, p.radius, p.t)?;
    let report = drift_report(&params)?;
    let units = params.scaled()?;
    let sigma = sigma_t(p.radius, p.m, p.t, HBAR)?;
    let summary = object(json!({
        "g": number(report.g),
        "delta_x": number(report.delta_x),
        "ratio": number(report.ratio),
        "source_mass": number(p.source_mass),
        "separation": number(p.d),
        "time": number(p.t),
        "spreading_time": number(units.time_scale),
        "sigma_t": number(sigma),
        "sigma_over_d": number(sigma / p.d),
        "delta_x_over_sigma": number(report.delta_x / sigma),
    }));
    let line = format!(
        "drift: δx/d = {:.6e} (g = {:.6e} m/s², δx = {:.6e} m, σ_t/d = {:.3e})",
        report.ratio,
        report.g,
        report.delta_x,
        sigma / p.d
    );
    Ok(Artifact {
        summary,
        line,
        tables: Vec::new(),
    })
}

pub fn spread(p: &SpreadParams) -> Result<Artifact> {
    let v = spreading_speed(p.m, p.radius, HBAR)?;
    let final_sigma = sigma_t(p.radius, p.m, p.t, HBAR)?;
    let units = ScaledUnits::new(p.m, p.radius, HBAR)?;
    if p.count < 2 {
        return Err(CliError::Usage("spread: count must be >= 2".into()));
    }
    // gaussian_density only reads m, R and ħ from the parameter set.
    let params = PhysicalParams::new(p.m, 0.0, 4.0 * p.radius, p.radius, p.t)?;
    let mut table = Table::new(
        "",
        &["time_s", "sigma_t_m", "sigma_over_R", "peak_density_m3"],
    );
    for i in 0..p.count {
        let t = p.t * i as f64 / (p.count - 1) as f64;
        let s = sigma_t(p.radius, p.m, t, HBAR)?;
        table.push_numbers(&[t, s, s / p.radius, gaussian_density(0.0, t, &params)?]);
    }
    let summary = object(json!({
        "sigma_t": number(final_sigma),
        "sigma_over_R": number(final_sigma / p.radius),
        "speed": number(v),
        "spreading_time": number(units.time_scale),
        "time": number(p.t),
    }));
    let line = format!(
        "spread: σ_t = {:.6e} m ({:.4} R) after {:.4e} s; v = ħ/2mR = {:.6e} m/s, T0 = {:.6e} s",
        final_sigma,
        final_sigma / p.radius,
        p.t,
        v,
        units.time_scale
    );
    Ok(Artifact {
        summary,
        line,
        tables: vec![table],
    })
}

fn scan_table(scan: &CutoffScan) -> Table {
    let mut table = Table::new("", &["cutoff", "value", "increment_per_decade"]);
    for ((c, v), inc) in scan
        .cutoffs
        .iter()
        .zip(&scan.values)
        .zip(scan.increments_per_decade())
    {
        table.push_numbers(&[*c, *v, inc]);
    }
    table
}

/// Growth over each whole decade of cutoff, from the first cutoff upwards.
fn decade_increments(scan: &CutoffScan) -> Vec<f64> {
    let c = &scan.cutoffs;
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(j) = (i + 1..c.len()).find(|&j| c[j] >= 10.0 * c[i] * (1.0 - 1e-9)) {
        out.push(scan.values[j] - scan.values[i]);
        i = j;
    }
    out
}

fn scan_summary(scan: &CutoffScan) -> Map<String, Value> {
    let incs = decade_increments(scan);
    let mean = incs.iter().sum::<f64>() / incs.len() as f64;
    let (lo, hi) = incs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let fit = scan.fit.expect("scans carry their fit");
    let residual = if fit.verdict == DivergenceVerdict::Convergent {
        f64::NAN
    } else {
        fit.residual
    };
    object(json!({
        "order": scan.order,
        "verdict": to_value(&fit.verdict),
        "slope_per_ln_cutoff": number(fit.slope),
        "fit_residual": number(residual),
        "decade_increments": incs.iter().map(|&v| number(v)).collect::<Vec<_>>(),
        "increment_first": number(incs[0]),
        "increment_last": number(incs[incs.len() - 1]),
        "increment_spread": number((hi - lo) / mean.abs()),
    }))
}

pub fn step_scan(p: &StepScanParams) -> Result<Artifact> {
    if !(p.k_max > p.k_min) {
        return Err(CliError::Usage("step-scan: k-max must exceed k-min".into()));
    }
    let state = |radius| match p.state {
        StateKind::Step => InitialState::Step { radius },
        StateKind::Gaussian => InitialState::Gaussian { radius },
    };
    let cutoffs = log_cutoffs(p.k_min, p.k_max, p.per_decade.max(1));
    let scan = momentum_scan(p.order, state(1.0), &cutoffs)?;
    let rel = relativistic_fraction(state(p.radius), p.m)?;
    let mut summary = scan_summary(&scan);
    summary.insert("state".into(), to_value(&p.state));
    summary.insert("relativistic".into(), to_value(&rel));
    let moment = if p.order == 1 {
        "⟨|k|⟩"
    } else {
        "⟨k²⟩"
    };
    let line = format!(
        "step-scan: {:?} {moment} over kR ∈ [{}, {}] is {}, slope {:.6} per ln k; relativistic fraction {:.3e}",
        p.state,
        p.k_min,
        p.k_max,
        summary["verdict"].as_str().unwrap_or("?"),
        scan.fit.map_or(f64::NAN, |f| f.slope),
        rel.probability_fraction
    );
    Ok(Artifact {
        summary,
        line,
        tables: vec![scan_table(&scan)],
    })
}

/// Largest grid built for the optional evolution comparison.
const MAX_COMPARISON_POINTS: usize = 1 << 23;

pub fn imaging(p: &ImagingParams) -> Result<Artifact> {
    let units = ScaledUnits::new(p.m, p.radius, HBAR)?;
    let t_si = p.t.unwrap_or(10.0 * units.time_scale);
    let t = units.time_to_scaled(t_si);
    if !(t > 0.0) {
        return Err(CliError::Usage("imaging: t must be > 0".into()));
    }
    if !(p.r_max > p.r_min && p.r_min > 1.0) {
        return Err(CliError::Usage(
            "imaging: need 1 < r-min < r-max (ballistic radii)".into(),
        ));
    }
    // Ballistic radius ħt/(mR) in units of R.
    let ballistic = t;
    let cutoffs = log_cutoffs(
        p.r_min * ballistic,
        p.r_max * ballistic,
        p.per_decade.max(1),
    );
    let scan = radial_scan(InitialState::Step { radius: 1.0 }, t, &cutoffs)?;
    let slope = imaging_tail_slope(t, 1.0, p.slope_from * ballistic, p.slope_to * ballistic)?;
    let mut summary = scan_summary(&scan);
    summary.insert("tail_slope".into(), number(slope));
    summary.insert("time".into(), number(t_si));
    summary.insert(
        "t_over_spreading_time".into(),
        number(t_si / units.time_scale),
    );
    summary.insert(
        "ballistic_radius_m".into(),
        number(units.length_to_si(ballistic)),
    );
    let mut tables = vec![scan_table(&scan)];
    let mut line = format!(
        "imaging: tail slope {:.4} at t = {:.3} T0; ⟨r⟩ scan is {}",
        slope,
        t_si / units.time_scale,
        summary["verdict"].as_str().unwrap_or("?")
    );
    if p.compare_evolution {
        let (table, worst) = compare_with_evolution(t)?;
        summary.insert("evolution_max_window_deviation".into(), number(worst));
        line.push_str(&format!(
            "; grid evolution agrees within {:.2}%",
            100.0 * worst
        ));
        tables.push(table);
    }
    Ok(Artifact {
        summary,
        line,
        tables,
    })
}

/// Period-averaged comparison of grid evolution with the imaging density
/// over r ∈ [10, 30] ballistic radii.
fn compare_with_evolution(t: f64) -> Result<(Table, f64)> {
    let dx = 1.0 / 64.0;
    let needed = 2.0 * 1.05 * PI * t / dx / dx;
    if !(needed <= MAX_COMPARISON_POINTS as f64) {
        return Err(CliError::Usage(format!("imaging: t = {t} needs more than {MAX_COMPARISON_POINTS} grid points for the comparison")));
    }
    let n = (needed.ceil() as usize).next_power_of_two().max(1024);
    let grid = make_grid(0.5 * n as f64 * dx, n)?;
    let psi = initialize_step_radial(&grid, 1.0)?;
    let evolved = evolve_free_exact(&psi, t)?;
    let numeric = radial_density(&evolved);
    let period = PI * t;
    let mut table = Table::new(
        "_evolution",
        &["window_start", "numeric", "imaging", "ratio"],
    );
    let mut worst: f64 = 0.0;
    let mut start = 10.0 * t;
    while start + period < 30.0 * t {
        let window: Vec<&(f64, f64)> = numeric
            .iter()
            .filter(|(r, _)| *r >= start && *r < start + period)
            .collect();
        let count = window.len() as f64;
        let num = window.iter().map(|(_, d)| d).sum::<f64>() / count;
        let img = window
            .iter()
            .map(|(r, _)| imaging_density(*r, t, 1.0))
            .sum::<std::result::Result<f64, _>>()?
            / count;
        worst = worst.max((num / img - 1.0).abs());
        table.push_numbers(&[start, num, img, num / img]);
        start += period;
    }
    Ok((table, worst))
}

fn potential(p: &EvolveParams) -> Potential {
    match p.potential {
        PotentialKind::Free => Potential::Free,
        PotentialKind::Uniform => Potential::uniform(p.g),
        PotentialKind::Softened => Potential::SoftenedPointSource {
            coupling: p.coupling,
            center: p.source_center,
            softening: p.softening,
        },
        PotentialKind::Delta => Potential::DeltaWell {
            strength: p.strength,
        },
        PotentialKind::Square => Potential::SquareWell {
            depth: p.depth,
            width: p.well_width,
        },
    }
}

pub fn evolve(p: &EvolveParams) -> Result<Artifact> {
    if !(p.time >= 0.0) {
        return Err(CliError::Usage("evolve: time must be >= 0".into()));
    }
    let mut times: Vec<f64> = p.dump_times.clone();
    if times.iter().any(|&t| !(t > 0.0 && t < p.time)) {
        return Err(CliError::Usage(
            "evolve: dump times must lie strictly between 0 and time".into(),
        ));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.push(p.time);

    let grid = make_grid(p.half_width, p.n_points)?;
    let v = potential(p);
    let mut state = initialize_gaussian(&grid, p.center, p.width, p.k0)?;
    let mut now = 0.0;
    let mut max_edge: f64 = 0.0;
    let mut tables = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let dt = t - now;
        let steps = if p.time > 0.0 {
            ((p.n_steps as f64 * dt / p.time).round() as usize).max(1)
        } else {
            p.n_steps
        };
        let out = evolve_state(&state, &v, &EvolutionSpec::strang(dt, steps))?;
        max_edge = max_edge.max(out.max_edge_probability);
        state = out.state;
        now = t;
        let suffix = if i + 1 == times.len() {
            String::new()
        } else {
            format!("_t{i}")
        };
        let mut table = Table::new(&suffix, &["x", "re", "im", "abs2"]);
        for (j, z) in state.samples.iter().enumerate() {
            table.push_numbers(&[grid.x(j), z.re, z.im, z.norm_sqr()]);
        }
        tables.push(table);
    }
    let mean = state.expectation_position();
    let variance = state.variance_position();
    let mut summary = object(json!({
        "time": number(p.time),
        "norm": number(state.norm()),
        "mean_x": number(mean),
        "variance_x": number(variance),
        "max_edge_probability": number(max_edge),
        "dump_times": times[..times.len() - 1],
        "potential": to_value(&v),
    }));
    let free_sigma = sigma_t(p.width, 1.0, p.time, 1.0)?;
    summary.insert("free_sigma_t".into(), number(free_sigma));
    let mut line = format!(
        "evolve: {:?} potential, t = {}, norm = {:.12}, ⟨x⟩ = {:.9e}, σ = {:.9e}",
        p.potential,
        p.time,
        state.norm(),
        mean,
        variance.sqrt()
    );
    if p.potential == PotentialKind::Uniform {
        let expected = p.center + p.k0 * p.time - 0.5 * p.g * p.time * p.time;
        summary.insert("ehrenfest_mean_x".into(), number(expected));
        line.push_str(&format!(" (Ehrenfest {expected:.9e})"));
    }
    Ok(Artifact {
        summary,
        line,
        tables,
    })
}

pub fn alpha(p: &AlphaParams) -> Result<Artifact> {
    let params = PhysicalParams::new(p.m, p.source_mass, p.d, p.radius, p.t)?;
    let (config, coupling, time) = scaled_setup(&params, p.spacing.unwrap_or(p.d))?;
    let settings = AmplitudeSettings {
        n_steps: p.n_steps,
        fit_samples: p.fit_samples,
        ..AmplitudeSettings::default()
    };
    let report = entanglement_report(&config, &coupling, time, &settings)?;
    let m = &report.matrix;
    let pair = |re: f64, im: f64| json!([number(re), number(im)]);
    let order = [
        (Branch::L, Branch::L),
        (Branch::L, Branch::R),
        (Branch::R, Branch::L),
        (Branch::R, Branch::R),
    ];
    let alpha: Vec<Value> = order
        .iter()
        .map(|(i, j)| m.alpha[i.index()][j.index()])
        .map(|z| pair(z.re, z.im))
        .collect();
    let phases: Vec<Value> = order
        .iter()
        .map(|(i, j)| {
            let c = report.phases[i.index()][j.index()];
            json!([number(c.measured), number(c.action_estimate)])
        })
        .collect();
    let cross = &m.cross;
    let summary = object(json!({
        "alpha": alpha,
        "det": pair(m.determinant.re, m.determinant.im),
        "det_abs": number(m.determinant.norm()),
        "log10_cross_abs": number(cross.value.log10_abs()),
        "cross_abs": if cross.value.needs_log_space() { Value::Null } else { number(cross.value.magnitude()) },
        "log_space": cross.value.needs_log_space(),
        "cross_method": to_value(&cross.method),
        "cross_fit_residual": number(cross.fit_residual),
        "drift_ratio": number(report.drift_ratio),
        "sigma_over_d": number(report.sigma_over_d),
        "phases": phases,
        "verdicts": to_value(&report.verdicts),
        "scaled_time": number(time),
        "scaled_separation": number(config.separation()),
    }));
    let mut table = Table::new("_crossed", &["displacement", "ln_abs_overlap"]);
    for (s, l) in &cross.samples {
        table.push_numbers(&[*s, *l]);
    }
    let line = format!(
        "alpha: |D| = {:.3e}, log10|O_cross| = {:.4}, crossed channel {}, determinant {}",
        m.determinant.norm(),
        cross.value.log10_abs(),
        summary["verdicts"]["crossed_channel"]
            .as_str()
            .unwrap_or("?"),
        summary["verdicts"]["determinant"].as_str().unwrap_or("?"),
    );
    Ok(Artifact {
        summary,
        line,
        tables: vec![table],
    })
}

pub fn green(p: &GreenParams) -> Result<Artifact> {
    if p.energy == 0.0 || !p.energy.is_finite() {
        return Err(CliError::Usage(
            "green: E must be finite and nonzero".into(),
        ));
    }
    let scale = (2.0 * p.m * p.energy.abs()).sqrt();
    let (lo, hi) = if p.energy < 0.0 {
        (
            p.x_min.unwrap_or(0.5 / scale),
            p.x_max.unwrap_or(8.0 / scale),
        )
    } else {
        (
            p.x_min.unwrap_or(0.5),
            p.x_max.unwrap_or(0.5 + 20.0 * PI / scale),
        )
    };
    let xs = greens::linspace(lo, hi, p.count);
    let settings = QuadratureSettings {
        k_max: p.k_max.unwrap_or(40.0 * scale),
        n_nodes: p.n_nodes,
        epsilon: p.epsilon,
    };
    let method = match p.method {
        GreenMethodArg::ClosedForm => GreenMethod::ClosedForm,
        GreenMethodArg::Quadrature => GreenMethod::Quadrature,
    };
    let eval = greens::green_eval(p.energy, p.m, &xs, method, &settings)?;
    let mut table = Table::new("", &["x", "re_G", "im_G", "abs_G", "log_abs_G"]);
    for (x, g) in eval.xs.iter().zip(&eval.values) {
        table.push_numbers(&[*x, g.re, g.im, g.norm(), g.norm().ln()]);
    }
    let mut summary = object(json!({
        "E": number(p.energy),
        "m": number(p.m),
        "method": to_value(&eval.method),
        "epsilon": number(p.epsilon),
        "k_max": number(settings.k_max),
    }));
    let line = if let Some(fit) = eval.decay {
        let k = greens::kappa(p.energy, p.m)?;
        summary.insert("kappa_analytic".into(), number(k));
        summary.insert("kappa_fit".into(), number(fit.kappa));
        summary.insert("residual".into(), number(fit.residual));
        summary.insert(
            "max_inverse_denominator".into(),
            number(greens::max_inverse_denominator(
                p.energy,
                p.m,
                settings.k_max,
                100_000,
            )),
        );
        format!(
            "green: E = {}, κ_fit = {:.9} vs √(2m|E|) = {:.9} (rel. dev. {:.2e})",
            p.energy,
            fit.kappa,
            k,
            (fit.kappa / k - 1.0).abs()
        )
    } else {
        let poles = greens::real_axis_poles(p.energy, p.m, settings.k_max, 10_001);
        summary.insert("wavenumber".into(), number(scale));
        summary.insert("real_axis_poles".into(), json!(poles));
        format!(
            "green: E = {} > 0, oscillatory with p₀ = {:.9}; {} real-axis poles at ε = {}",
            p.energy,
            scale,
            poles.len(),
            p.epsilon
        )
    };
    Ok(Artifact {
        summary,
        line,
        tables: vec![table],
    })
}

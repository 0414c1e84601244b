//! The uniform-ball ("step") initial state: its momentum amplitude, divergent
//! moments, far-field imaging density and relativistic tail weight.
//!
//! Scaled units throughout (ħ = m = 1) except for [`relativistic_fraction`],
//! which takes SI inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::gaussian_density_3d;
use crate::error::{require_positive, Error, Result};
use crate::fit::fit_line;
use crate::model::{HBAR, SPEED_OF_LIGHT};
use crate::quad::PanelRule;

/// Spherically symmetric initial states compared throughout this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialState {
    /// θ(R − r)/√V
    Step { radius: f64 },
    /// (2πR²)^(-3/4)·exp(−r²/4R²)
    Gaussian { radius: f64 },
}

impl InitialState {
    pub fn radius(&self) -> f64 {
        match *self {
            InitialState::Step { radius } | InitialState::Gaussian { radius } => radius,
        }
    }

    fn validate(&self) -> Result<()> {
        require_positive("radius", self.radius())
    }

    /// |φ̃(k)|² in the unitary 3D convention, so ∫|φ̃|²·4πk²dk = 1.
    pub fn momentum_density(&self, k: f64) -> f64 {
        match *self {
            InitialState::Step { radius } => step_momentum_exact(k, radius).powi(2),
            InitialState::Gaussian { radius } => {
                let sk = 0.5 / radius;
                gaussian_density_3d(k, sk)
            }
        }
    }

    /// Position density at time t (free evolution): the imaging form for the
    /// step state, the closed Gaussian form otherwise.
    pub fn position_density(&self, r: f64, t: f64) -> f64 {
        match *self {
            InitialState::Step { radius } => imaging_density_unchecked(r, t, radius),
            InitialState::Gaussian { radius } => {
                let sigma = radius.hypot(t / (2.0 * radius));
                gaussian_density_3d(r, sigma)
            }
        }
    }
}

/// ψ(r) = 1/√V inside the ball (including r = R), 0 outside.
pub fn step_position_wavefunction(r: f64, radius: f64) -> Result<f64> {
    require_positive("radius", radius)?;
    if !(r >= 0.0) {
        return Err(Error::param(
            "r",
            format!("radius coordinate must be >= 0, got {r}"),
        ));
    }
    if r <= radius {
        Ok(1.0 / ball_volume(radius).sqrt())
    } else {
        Ok(0.0)
    }
}

fn ball_volume(radius: f64) -> f64 {
    4.0 * PI * radius.powi(3) / 3.0
}

/// (sin x − x cos x)/x³, with its Taylor series near the origin.
pub(crate) fn ball_profile(x: f64) -> f64 {
    if x.abs() < 0.2 {
        // Σ (−1)^{n+1}·2n·x^{2n−2}/(2n+1)!
        let x2 = x * x;
        let mut term = 1.0 / 3.0;
        let mut sum = term;
        for n in 2..8 {
            let n = n as f64;
            term *= -x2 * n / ((n - 1.0) * (2.0 * n) * (2.0 * n + 1.0));
            sum += term;
        }
        sum
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// Prefactor A in φ̃(k) = A·(sin kR − kR cos kR)/k³.
fn step_amplitude_constant(radius: f64) -> f64 {
    4.0 * PI / (ball_volume(radius).sqrt() * (2.0 * PI).powf(1.5))
}

fn step_momentum_exact(k: f64, radius: f64) -> f64 {
    step_amplitude_constant(radius) * radius.powi(3) * ball_profile(k * radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumAmplitude {
    pub k: f64,
    pub exact: f64,
    /// Large-k form −A·R·cos(kR)/k² with the same prefactor as `exact`.
    pub tail: f64,
}

pub fn step_momentum_amplitude(k: f64, radius: f64) -> Result<MomentumAmplitude> {
    require_positive("radius", radius)?;
    if !(k >= 0.0) {
        return Err(Error::param("k", format!("must be >= 0, got {k}")));
    }
    let exact = step_momentum_exact(k, radius);
    let tail = if k == 0.0 {
        f64::INFINITY
    } else {
        -step_amplitude_constant(radius) * radius * (k * radius).cos() / (k * k)
    };
    Ok(MomentumAmplitude { k, exact, tail })
}

/// Mean of `f` over [start, start + period], by Gauss–Legendre on 8 panels.
pub fn window_average(start: f64, period: f64, f: impl Fn(f64) -> f64) -> f64 {
    PanelRule::new(12).integrate(start, start + period, 8, f) / period
}

/// ∫_X^∞ (sin x − x cos x)²/x⁴ dx.
pub(crate) fn ball_tail_integral(x0: f64) -> f64 {
    const SWITCH: f64 = 2000.0;
    let asymptotic = |x: f64| {
        let (s2, c2) = (2.0 * x).sin_cos();
        1.0 / (2.0 * x) + 1.0 / (6.0 * x.powi(3)) - s2 / (4.0 * x * x) - c2 / (4.0 * x.powi(3))
    };
    if x0 >= SWITCH {
        return asymptotic(x0);
    }
    let integrand = |x: f64| {
        let p = ball_profile(x);
        p * p * x * x
    };
    integrate_oscillatory(x0, SWITCH, PI / 4.0, integrand) + asymptotic(SWITCH)
}

/// Composite Gauss–Legendre with panels no wider than `max_panel`.
fn integrate_oscillatory(a: f64, b: f64, max_panel: f64, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
    PanelRule::new(10).integrate(a, b, panels, f)
}

fn moment_integrand(state: InitialState, order: u32) -> impl Fn(f64) -> f64 {
    move |k: f64| k.powi(order as i32) * state.momentum_density(k) * 4.0 * PI * k * k
}

/// ∫₀^{k_max} kⁿ |φ̃(k)|² 4πk² dk.
pub fn momentum_moment_cutoff(order: u32, state: InitialState, k_max: f64) -> Result<f64> {
    state.validate()?;
    check_order(order)?;
    let radius = state.radius();
    if !(k_max * radius >= 10.0 * (1.0 - 1e-12)) {
        return Err(Error::Unresolved(format!(
            "cutoff k_max·R = {} must be >= 10 to reach the tail",
            k_max * radius
        )));
    }
    Ok(integrate_oscillatory(
        0.0,
        k_max,
        PI / (4.0 * radius),
        moment_integrand(state, order),
    ))
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::param(
            "order",
            format!("moment order must be 1 or 2, got {order}"),
        ))
    }
}

/// Moment values at an increasing sequence of cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffScan {
    pub order: u32,
    pub cutoffs: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<DivergenceFit>,
}

impl CutoffScan {
    pub fn new(order: u32, cutoffs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if cutoffs.len() != values.len() {
            return Err(Error::InsufficientData(
                "cutoff and value counts differ".into(),
            ));
        }
        if cutoffs.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "scan needs >= 4 points, got {}",
                cutoffs.len()
            )));
        }
        if cutoffs.windows(2).any(|w| !(w[1] > w[0])) || !(cutoffs[0] > 0.0) {
            return Err(Error::param(
                "cutoffs",
                "must be positive and strictly increasing",
            ));
        }
        let span = (cutoffs[cutoffs.len() - 1] / cutoffs[0]).log10();
        if span < 2.0 - 1e-9 {
            return Err(Error::InsufficientData(format!(
                "scan spans {span:.3} decades, need >= 2"
            )));
        }
        Ok(Self {
            order,
            cutoffs,
            values,
            fit: None,
        })
    }

    /// (v_i − v_{i−1}) / log₁₀(c_i/c_{i−1}); NaN for the first point.
    pub fn increments_per_decade(&self) -> Vec<f64> {
        std::iter::once(f64::NAN)
            .chain(
                self.cutoffs
                    .windows(2)
                    .zip(self.values.windows(2))
                    .map(|(c, v)| (v[1] - v[0]) / (c[1] / c[0]).log10()),
            )
            .collect()
    }
}

/// `per_decade` logarithmically spaced cutoffs from `lo` to `hi` inclusive.
pub fn log_cutoffs(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n)
        .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
        .collect()
}

/// Momentum-moment scan, integrating only between successive cutoffs.
pub fn momentum_scan(order: u32, state: InitialState, cutoffs: &[f64]) -> Result<CutoffScan> {
    let first = *cutoffs
        .first()
        .ok_or_else(|| Error::InsufficientData("empty cutoff list".into()))?;
    let mut values = Vec::with_capacity(cutoffs.len());
    let mut acc = momentum_moment_cutoff(order, state, first)?;
    values.push(acc);
    let f = moment_integrand(state, order);
    let panel = PI / (4.0 * state.radius());
    for w in cutoffs.windows(2) {
        acc += integrate_oscillatory(w[0], w[1], panel, &f);
        values.push(acc);
    }
    let mut scan = CutoffScan::new(order, cutoffs.to_vec(), values)?;
    scan.fit = Some(log_divergence_fit(&scan)?);
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceVerdict {
    LogDivergent,
    Convergent,
    /// Growing, but not linearly in ln(cutoff).
    NonLogarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    /// d(value)/d(ln cutoff)
    pub slope: f64,
    pub intercept: f64,
    /// Largest fit deviation as a fraction of the fitted rise over the scan.
    pub residual: f64,
    pub verdict: DivergenceVerdict,
}

/// Relative rise below which a scan counts as converged.
pub const CONVERGED_RISE: f64 = 1e-6;
/// Fit residual (fraction of fitted range) below which growth is logarithmic.
pub const LOG_RESIDUAL_LIMIT: f64 = 0.05;

/// Least-squares fit of the moment against ln(cutoff).
pub fn log_divergence_fit(scan: &CutoffScan) -> Result<DivergenceFit> {
    let checked = CutoffScan::new(scan.order, scan.cutoffs.clone(), scan.values.clone())?;
    let logs: Vec<f64> = checked.cutoffs.iter().map(|c| c.ln()).collect();
    let line = fit_line(&logs, &checked.values)?;
    let rise = line.slope * (logs[logs.len() - 1] - logs[0]);
    let scale = checked.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = if rise.abs() > 0.0 {
        line.max_residual / rise.abs()
    } else {
        f64::INFINITY
    };
    let verdict = if !(rise > CONVERGED_RISE * scale) {
        DivergenceVerdict::Convergent
    } else if residual < LOG_RESIDUAL_LIMIT {
        DivergenceVerdict::LogDivergent
    } else {
        DivergenceVerdict::NonLogarithmic
    };
    Ok(DivergenceFit {
        slope: line.slope,
        intercept: line.intercept,
        residual,
        verdict,
    })
}

/// (1/t)³·|φ̃(r/t)|²: far-field density of the freely evolved step state.
pub fn imaging_density(r: f64, t: f64, radius: f64) -> Result<f64> {
    require_positive("radius", radius)?;
    if !(t > 0.0) {
        return Err(Error::param(
            "t",
            format!("imaging density needs t > 0, got {t}"),
        ));
    }
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("must be >= 0, got {r}")));
    }
    Ok(imaging_density_unchecked(r, t, radius))
}

fn imaging_density_unchecked(r: f64, t: f64, radius: f64) -> f64 {
    step_momentum_exact(r / t, radius).powi(2) / (t * t * t)
}

/// ∫₀^{r_max} r·ρ(r, t)·4πr² dr for the given state.
pub fn radial_moment_cutoff(state: InitialState, t: f64, r_max: f64) -> Result<f64> {
    state.validate()?;
    if !(t > 0.0) {
        return Err(Error::param("t", format!("must be > 0, got {t}")));
    }
    let ballistic = t / state.radius();
    if !(r_max > ballistic) {
        return Err(Error::Unresolved(format!(
            "cutoff {r_max} lies inside the ballistic core radius {ballistic}"
        )));
    }
    Ok(integrate_oscillatory(
        0.0,
        r_max,
        radial_panel(state, t),
        radial_integrand(state, t),
    ))
}

fn radial_panel(state: InitialState, t: f64) -> f64 {
    let r = state.radius();
    (PI * t / (4.0 * r)).min(r.hypot(t / (2.0 * r)) / 4.0)
}

fn radial_integrand(state: InitialState, t: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| r * state.position_density(r, t) * 4.0 * PI * r * r
}

pub fn radial_scan(state: InitialState, t: f64, cutoffs: &[f64]) -> Result<CutoffScan> {
    let first = *cutoffs
        .first()
        .ok_or_else(|| Error::InsufficientData("empty cutoff list".into()))?;
    let mut acc = radial_moment_cutoff(state, t, first)?;
    let mut values = vec![acc];
    let f = radial_integrand(state, t);
    let panel = radial_panel(state, t);
    for w in cutoffs.windows(2) {
        acc += integrate_oscillatory(w[0], w[1], panel, &f);
        values.push(acc);
    }
    let mut scan = CutoffScan::new(1, cutoffs.to_vec(), values)?;
    scan.fit = Some(log_divergence_fit(&scan)?);
    Ok(scan)
}

/// Log-log slope of the step-state imaging density, averaged over windows of
/// one oscillation period πt/R covering [r_lo, r_hi].
pub fn imaging_tail_slope(t: f64, radius: f64, r_lo: f64, r_hi: f64) -> Result<f64> {
    require_positive("radius", radius)?;
    require_positive("t", t)?;
    let period = PI * t / radius;
    if !(r_hi - r_lo >= 8.0 * period) {
        return Err(Error::InsufficientData(
            "tail range must cover >= 8 oscillation periods".into(),
        ));
    }
    let windows = ((r_hi - r_lo) / period).floor() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..windows)
        .map(|w| {
            let start = r_lo + w as f64 * period;
            let avg = window_average(start, period, |r| imaging_density_unchecked(r, t, radius));
            ((start + 0.5 * period).ln(), avg.ln())
        })
        .unzip();
    Ok(fit_line(&xs, &ys)?.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativisticFraction {
    /// Wavenumber mc/ħ (1/m).
    pub cutoff_wavenumber: f64,
    /// mcR/ħ
    pub cutoff_scaled: f64,
    /// Probability weight with ħk > mc.
    pub probability_fraction: f64,
    /// Share of ⟨ħ²k²/2m⟩ carried by ħk > mc (1 when the total diverges).
    pub kinetic_energy_fraction: f64,
    pub kinetic_energy_divergent: bool,
}

/// Weight of the state above the nonrelativistic cutoff ħk = mc (SI inputs).
pub fn relativistic_fraction(state: InitialState, mass: f64) -> Result<RelativisticFraction> {
    require_positive("mass", mass)?;
    state.validate()?;
    let radius = state.radius();
    let cutoff_wavenumber = mass * SPEED_OF_LIGHT / HBAR;
    let x = cutoff_wavenumber * radius;
    let out = match state {
        InitialState::Step { .. } => RelativisticFraction {
            cutoff_wavenumber,
            cutoff_scaled: x,
            probability_fraction: 6.0 / PI * ball_tail_integral(x),
            kinetic_energy_fraction: 1.0,
            kinetic_energy_divergent: true,
        },
        InitialState::Gaussian { .. } => {
            // Momentum spread 1/(2R): y = (k_c/σ_k)²/2 = 2x².
            let y = 2.0 * x * x;
            let sy = y.sqrt();
            let tail = (-y).exp();
            let erfc = libm::erfc(sy);
            let probability = erfc + 2.0 / PI.sqrt() * sy * tail;
            let kinetic = erfc + (2.0 * sy + 4.0 / 3.0 * sy * y) / PI.sqrt() * tail;
            RelativisticFraction {
                cutoff_wavenumber,
                cutoff_scaled: x,
                probability_fraction: probability,
                kinetic_energy_fraction: kinetic,
                kinetic_energy_divergent: false,
            }
        }
    };
    Ok(out)
}

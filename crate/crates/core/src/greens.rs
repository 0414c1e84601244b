//! Fixed-energy free Green's function in one dimension, bound states of
//! short-range wells, and the decay-rate analysis that ties them together.
//!
//! Convention: G_E(x) = (1/2π)∫ e^{ipx}/(E − p²/2m + iε) dp, so that
//! (E − H₀)G = δ(x). Scaled units, ħ = 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::fit::fit_line;
use crate::quad::{adaptive_with_noise, PanelRule};

/// κ = √(2m|E|) for a bound (E < 0) energy.
pub fn kappa(energy: f64, mass: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    if !(energy < 0.0) || !energy.is_finite() {
        return Err(Error::param(
            "energy",
            format!("decay constant needs E < 0, got {energy}"),
        ));
    }
    Ok((2.0 * mass * energy.abs()).sqrt())
}

/// −(m/κ)·e^{−κ|x|}
pub fn green_closed_form(x: f64, energy: f64, mass: f64) -> Result<Complex64> {
    let k = kappa(energy, mass)?;
    Ok(Complex64::new(-(mass / k) * (-k * x.abs()).exp(), 0.0))
}

/// Outgoing-wave G for E > 0 with explicit ε: −i·m·e^{ip₀|x|}/p₀,
/// p₀ = √(2m(E + iε)) in the upper half plane.
pub fn green_positive_energy(x: f64, energy: f64, mass: f64, epsilon: f64) -> Result<Complex64> {
    require_positive("mass", mass)?;
    require_positive("energy", energy)?;
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", "E > 0 needs an explicit ε > 0"));
    }
    let p0 = (Complex64::new(2.0 * mass * energy, 2.0 * mass * epsilon)).sqrt();
    Ok(-Complex64::i() * mass * (Complex64::i() * p0 * x.abs()).exp() / p0)
}

/// Poles of the integrand in the complex momentum plane: ±√(2m(E + iε)).
pub fn pole_momenta(energy: f64, mass: f64, epsilon: f64) -> [Complex64; 2] {
    let p0 = (Complex64::new(2.0 * mass * energy, 2.0 * mass * epsilon)).sqrt();
    [p0, -p0]
}

/// Real zeros of E − p²/2m in [−p_max, p_max], located by a sign-change scan
/// refined with bisection.
pub fn real_axis_poles(energy: f64, mass: f64, p_max: f64, samples: usize) -> Vec<f64> {
    let f = |p: f64| energy - p * p / (2.0 * mass);
    let h = 2.0 * p_max / samples as f64;
    let mut roots = Vec::new();
    for i in 0..samples {
        let (mut a, mut b) = (-p_max + i as f64 * h, -p_max + (i + 1) as f64 * h);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(a) * f(m) <= 0.0 {
                    b = m
                } else {
                    a = m
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

/// max |1/(E − p²/2m)| over a uniform scan of [−p_max, p_max].
pub fn max_inverse_denominator(energy: f64, mass: f64, p_max: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| -p_max + 2.0 * p_max * i as f64 / samples as f64)
        .map(|p| 1.0 / (energy - p * p / (2.0 * mass)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub k_max: f64,
    pub n_nodes: usize,
    /// Must be 0 for E < 0 and > 0 for E > 0.
    pub epsilon: f64,
}

/// Work record of one quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureAudit {
    pub panels: usize,
    pub evaluations: usize,
    pub panel_width: f64,
    /// Analytic contribution of |p| > k_max.
    pub tail: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: Complex64,
    pub audit: QuadratureAudit,
}

/// Numerical Fourier integral for G_E(x) on [−k_max, k_max] plus an
/// asymptotic correction for the truncated tail.
pub fn green_quadrature(
    x: f64,
    energy: f64,
    mass: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureValue> {
    require_positive("mass", mass)?;
    require_positive("k_max", settings.k_max)?;
    if !energy.is_finite() || energy == 0.0 {
        return Err(Error::param("energy", "must be finite and nonzero"));
    }
    if energy < 0.0 && settings.epsilon != 0.0 {
        return Err(Error::param("epsilon", "E < 0 is evaluated with ε = 0"));
    }
    if energy > 0.0 && !(settings.epsilon > 0.0) {
        return Err(Error::param("epsilon", "E > 0 needs an explicit ε > 0"));
    }
    if settings.n_nodes < 1000 {
        return Err(Error::param(
            "n_nodes",
            format!("need >= 1000 nodes, got {}", settings.n_nodes),
        ));
    }
    let k_max = settings.k_max;
    if x != 0.0 && k_max / settings.n_nodes as f64 > PI / (4.0 * x.abs()) {
        return Err(Error::Unresolved(format!(
            "node spacing {} exceeds π/(4|x|) = {}",
            k_max / settings.n_nodes as f64,
            PI / (4.0 * x.abs())
        )));
    }
    // E − p²/2m + iε = −(p² + c)/(2m)
    let c = Complex64::new(-2.0 * mass * energy, -2.0 * mass * settings.epsilon);
    let feature = c.norm().sqrt();
    if energy < 0.0 && k_max < 20.0 * feature {
        return Err(Error::Unresolved(format!(
            "k_max must be >= 20κ = {}",
            20.0 * feature
        )));
    }
    let h = |p: f64| -2.0 * mass / (Complex64::new(p * p, 0.0) + c);

    let mut width = k_max / (settings.n_nodes as f64 / 15.0).ceil();
    if x != 0.0 {
        width = width.min(PI / (8.0 * x.abs()));
    }
    width = width.min(0.5 * feature);
    // Narrow Lorentzian around an on-shell momentum.
    let mut breaks = vec![0.0, k_max];
    let mut line_width = 0.0;
    if energy > 0.0 {
        let p0 = (2.0 * mass * energy).sqrt();
        line_width = (2.0 * mass * settings.epsilon / p0).max(1e-300);
        let w = (50.0 * line_width).min(0.5 * p0);
        for b in [p0 - w, p0 + w] {
            if b > 0.0 && b < k_max {
                breaks.push(b);
            }
        }
        breaks.sort_by(f64::total_cmp);
    }
    let scale = 2.0 * mass / feature;
    let tol = 1e-15 * scale;
    let mut total = Complex64::new(0.0, 0.0);
    let mut panels = 0;
    let mut evaluations = 0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let narrow = energy > 0.0 && a > 0.0 && b < k_max;
        let w = if narrow { width.min(line_width) } else { width };
        let base = ((b - a) / w).ceil().max(1.0) as usize;
        let noise = f64::EPSILON * (1.0 + b * x.abs());
        let re = adaptive_with_noise(a, b, base, tol, noise, |p| (p * x).cos() * h(p).re);
        let im = adaptive_with_noise(a, b, base, tol, noise, |p| (p * x).cos() * h(p).im);
        total += Complex64::new(re.value, im.value);
        panels += re.panels + im.panels;
        evaluations += re.evaluations + im.evaluations;
    }
    let tail = fourier_tail(x, k_max, mass, c);
    // (1/2π)·2·∫₀^∞ cos(px)·h(p) dp
    let value = (total + tail) / PI;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite("green quadrature"));
    }
    Ok(QuadratureValue {
        value,
        audit: QuadratureAudit {
            panels,
            evaluations,
            panel_width: width,
            tail: tail / PI,
        },
    })
}

/// ∫_K^∞ cos(px)·(−2m/(p² + c)) dp.
fn fourier_tail(x: f64, k: f64, mass: f64, c: Complex64) -> Complex64 {
    let exact_at_origin = |k: f64| {
        let s = c.sqrt();
        -2.0 * mass / s * (Complex64::new(PI / 2.0, 0.0) - (Complex64::new(k, 0.0) / s).atan())
    };
    let x = x.abs();
    if x == 0.0 {
        return exact_at_origin(k);
    }
    // Push the expansion point out until the oscillation dominates.
    let start = k.max(20.0 / x);
    let mut bridge = Complex64::new(0.0, 0.0);
    if start > k {
        if start > 1e3 * k {
            return exact_at_origin(k);
        }
        let h = |p: f64| -2.0 * mass / (Complex64::new(p * p, 0.0) + c);
        let panels = ((start - k) / (PI / (8.0 * x))).ceil().max(1.0) as usize;
        let rule = PanelRule::new(10);
        bridge = Complex64::new(
            rule.integrate(k, start, panels, |p| (p * x).cos() * h(p).re),
            rule.integrate(k, start, panels, |p| (p * x).cos() * h(p).im),
        );
    }
    let k = start;
    let d = Complex64::new(k * k, 0.0) + c;
    let h0 = -2.0 * mass / d;
    let h1 = 4.0 * mass * k / (d * d);
    let h2 = 4.0 * mass * (c - 3.0 * k * k) / (d * d * d);
    let h3 = 48.0 * mass * k * (k * k - c) / (d * d * d * d);
    let (s, co) = (k * x).sin_cos();
    bridge - s * h0 / x - co * h1 / (x * x) + s * h2 / x.powi(3) + co * h3 / x.powi(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kappa: f64,
    /// RMS deviation of ln|G| from the fitted line.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenEval {
    pub energy: f64,
    pub mass: f64,
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub method: GreenMethod,
    /// Only attempted for E < 0.
    pub decay: Option<DecayFit>,
    pub epsilon: f64,
}

/// Samples G_E at `xs` and, for E < 0, fits its decay rate.
pub fn green_eval(
    energy: f64,
    mass: f64,
    xs: &[f64],
    method: GreenMethod,
    settings: &QuadratureSettings,
) -> Result<GreenEval> {
    let values: Vec<Complex64> = xs
        .iter()
        .map(|&x| match (method, energy < 0.0) {
            (GreenMethod::ClosedForm, true) => green_closed_form(x, energy, mass),
            (GreenMethod::ClosedForm, false) => {
                green_positive_energy(x, energy, mass, settings.epsilon)
            }
            (GreenMethod::Quadrature, _) => {
                green_quadrature(x, energy, mass, settings).map(|q| q.value)
            }
        })
        .collect::<Result<_>>()?;
    let decay = if energy < 0.0 {
        Some(fit_decay_rate(xs, &values)?)
    } else {
        None
    };
    Ok(GreenEval {
        energy,
        mass,
        xs: xs.to_vec(),
        values,
        method,
        decay,
        epsilon: settings.epsilon,
    })
}

/// Smallest magnitude accepted by the decay fit.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Least-squares slope of ln|G| against |x|.
pub fn fit_decay_rate(xs: &[f64], values: &[Complex64]) -> Result<DecayFit> {
    if xs.len() != values.len() || xs.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs >= 8 samples, got {}",
            xs.len()
        )));
    }
    let positive = xs.iter().all(|&x| x > 0.0);
    let negative = xs.iter().all(|&x| x < 0.0);
    if !(positive || negative) {
        return Err(Error::param(
            "xs",
            "decay fit needs samples on one side of the origin",
        ));
    }
    if values.iter().any(|v| !(v.norm() >= UNDERFLOW_FLOOR)) {
        return Err(Error::InsufficientData(
            "sample magnitude below the underflow floor".into(),
        ));
    }
    let ax: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();
    let line = fit_line(&ax, &ly)?;
    let kappa = -line.slope;
    let span = ax.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - ax.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(kappa * span >= 3.0) {
        return Err(Error::InsufficientData(format!(
            "samples span {:.3} decay lengths, need >= 3",
            kappa * span
        )));
    }
    Ok(DecayFit {
        kappa,
        residual: line.rms_residual,
    })
}

/// Bound state of V = −λ·δ(x): κ = mλ, E = −mλ²/2, ψ = √κ·e^{−κ|x|}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWell {
    pub strength: f64,
    pub mass: f64,
}

impl DeltaWell {
    pub fn new(strength: f64, mass: f64) -> Result<Self> {
        require_positive("strength", strength)?;
        require_positive("mass", mass)?;
        Ok(Self { strength, mass })
    }

    pub fn kappa(&self) -> f64 {
        self.mass * self.strength
    }

    pub fn energy(&self) -> f64 {
        -0.5 * self.mass * self.strength * self.strength
    }

    pub fn wavefunction(&self, x: f64) -> f64 {
        let k = self.kappa();
        k.sqrt() * (-k * x.abs()).exp()
    }

    /// ∫G(x − x′)V(x′)ψ(x′)dx′ = −λ·G(x)·ψ(0).
    pub fn lippmann_schwinger(&self, x: f64) -> Result<f64> {
        Ok(-self.strength
            * green_closed_form(x, self.energy(), self.mass)?.re
            * self.wavefunction(0.0))
    }
}

/// Even ground state of V = −V₀ for |x| < a/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareWell {
    pub depth: f64,
    pub width: f64,
    pub mass: f64,
    pub energy: f64,
    /// Interior wavenumber.
    pub q: f64,
    pub kappa: f64,
    /// ψ = cos(qx) inside, amplitude·e^{−κ|x|} outside (unnormalized).
    pub amplitude: f64,
}

impl SquareWell {
    /// Ground state from z·tan z = √(z₀² − z²), z = qa/2, by bisection.
    pub fn ground_state(depth: f64, width: f64, mass: f64) -> Result<Self> {
        require_positive("depth", depth)?;
        require_positive("width", width)?;
        require_positive("mass", mass)?;
        let z0 = 0.5 * width * (2.0 * mass * depth).sqrt();
        let f = |z: f64| z * z.tan() - (z0 * z0 - z * z).max(0.0).sqrt();
        let (mut lo, mut hi) = (0.0, z0.min(0.5 * PI * (1.0 - 1e-15)));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
            if hi - lo < 1e-12 * z0.max(1e-300) * 1e-3 {
                break;
            }
        }
        let z = 0.5 * (lo + hi);
        let q = 2.0 * z / width;
        let kappa = (z0 * z0 - z * z).max(0.0).sqrt() * 2.0 / width;
        let energy = -kappa * kappa / (2.0 * mass);
        let amplitude = (q * width / 2.0).cos() * (kappa * width / 2.0).exp();
        Ok(Self {
            depth,
            width,
            mass,
            energy,
            q,
            kappa,
            amplitude,
        })
    }

    /// Count of bound states, even and odd.
    pub fn bound_state_count(&self) -> usize {
        let z0 = 0.5 * self.width * (2.0 * self.mass * self.depth).sqrt();
        (z0 / (0.5 * PI)).ceil() as usize
    }

    pub fn wavefunction(&self, x: f64) -> f64 {
        if x.abs() < 0.5 * self.width {
            (self.q * x).cos()
        } else {
            self.amplitude * (-self.kappa * x.abs()).exp()
        }
    }

    /// ∫ over the well of G(x − x′)·(−V₀)·ψ(x′), by Gauss–Legendre.
    pub fn lippmann_schwinger(&self, x: f64) -> Result<f64> {
        let half = 0.5 * self.width;
        let rule = PanelRule::new(20);
        let integrand = |xp: f64| {
            green_closed_form(x - xp, self.energy, self.mass)
                .map(|g| g.re)
                .unwrap_or(f64::NAN)
                * (-self.depth)
                * self.wavefunction(xp)
        };
        // Split at x′ = x where |x − x′| has a kink.
        let v = if x.abs() < half {
            rule.integrate(-half, x, 64, integrand) + rule.integrate(x, half, 64, integrand)
        } else {
            rule.integrate(-half, half, 64, integrand)
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("square-well Lippmann–Schwinger integral"))
        }
    }
}

/// Constancy of ψ/G_E over far-field probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldReport {
    pub energy: f64,
    pub kappa: f64,
    /// max |r/r̄ − 1| over the probes for r = ψ/G_E.
    pub max_ratio_deviation: f64,
    /// max |ψ_LS/ψ − 1| for ψ rebuilt from the bound-state integral equation.
    pub max_integral_residual: f64,
    /// Decay rate fitted to the bound-state tail.
    pub tail_kappa_fit: f64,
}

fn check_probes(probes: &[f64]) -> Result<()> {
    if probes.len() < 8 {
        return Err(Error::InsufficientData("need >= 8 probe points".into()));
    }
    if probes.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::param(
            "probes",
            "probe range must not touch the origin",
        ));
    }
    Ok(())
}

fn far_field(
    energy: f64,
    mass: f64,
    probes: &[f64],
    psi: impl Fn(f64) -> f64,
    rebuilt: impl Fn(f64) -> Result<f64>,
) -> Result<FarFieldReport> {
    let ratios: Vec<f64> = probes
        .iter()
        .map(|&x| green_closed_form(x, energy, mass).map(|g| psi(x) / g.re))
        .collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_ratio_deviation = ratios
        .iter()
        .map(|r| (r / mean - 1.0).abs())
        .fold(0.0, f64::max);
    let max_integral_residual = probes
        .iter()
        .map(|&x| rebuilt(x).map(|v| (v / psi(x) - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tail: Vec<Complex64> = probes
        .iter()
        .map(|&x| Complex64::new(psi(x), 0.0))
        .collect();
    let tail_kappa_fit = fit_decay_rate(probes, &tail)?.kappa;
    Ok(FarFieldReport {
        energy,
        kappa: kappa(energy, mass)?,
        max_ratio_deviation,
        max_integral_residual,
        tail_kappa_fit,
    })
}

pub fn delta_well_farfield_check(
    strength: f64,
    mass: f64,
    probes: &[f64],
) -> Result<FarFieldReport> {
    check_probes(probes)?;
    let well = DeltaWell::new(strength, mass)?;
    far_field(
        well.energy(),
        mass,
        probes,
        |x| well.wavefunction(x),
        |x| well.lippmann_schwinger(x),
    )
}

pub fn square_well_farfield_check(
    depth: f64,
    width: f64,
    mass: f64,
    probes: &[f64],
) -> Result<FarFieldReport> {
    check_probes(probes)?;
    let well = SquareWell::ground_state(depth, width, mass)?;
    far_field(
        well.energy,
        mass,
        probes,
        |x| well.wavefunction(x),
        |x| well.lippmann_schwinger(x),
    )
}

/// `n` evenly spaced points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64)
        .collect()
}

//! Closed-form drift and spreading formulas.
//!
//! Every function here is grid-free; the numerical propagator is checked
//! against them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{PhysicalParams, G_NEWTON};

/// g = G·M/d², the uniform-field acceleration at separation d.
pub fn gravitational_acceleration(source_mass: f64, separation: f64) -> Result<f64> {
    require_positive("source_mass", source_mass)?;
    require_positive("separation", separation)?;
    Ok(G_NEWTON * source_mass / (separation * separation))
}

/// δx = g·t²/2.
pub fn classical_drift(g: f64, time: f64) -> Result<f64> {
    require_non_negative("g", g)?;
    require_non_negative("time", time)?;
    Ok(0.5 * g * time * time)
}

/// σ_t = √(R² + (ħt/2mR)²).
pub fn sigma_t(radius: f64, mass: f64, time: f64, hbar: f64) -> Result<f64> {
    let v = spreading_speed(mass, radius, hbar)?;
    require_non_negative("time", time)?;
    Ok(radius.hypot(v * time))
}

/// v = ħ/(2mR).
pub fn spreading_speed(mass: f64, radius: f64, hbar: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("radius", radius)?;
    require_positive("hbar", hbar)?;
    Ok(hbar / (2.0 * mass * radius))
}

/// 3D density (2πσ_t²)^(-3/2)·exp(-r²/2σ_t²) of a freely spreading Gaussian
/// that starts with radius R.
pub fn gaussian_density(r: f64, time: f64, params: &PhysicalParams) -> Result<f64> {
    let s = sigma_t(
        params.packet_radius,
        params.particle_mass,
        time,
        params.hbar,
    )?;
    Ok(gaussian_density_3d(r, s))
}

pub(crate) fn gaussian_density_3d(r: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-1.5) * (-r * r / (2.0 * sigma * sigma)).exp()
}

/// One-dimensional counterpart: (2πσ_t²)^(-1/2)·exp(-(x-c)²/2σ_t²).
pub fn gaussian_density_1d(x: f64, center: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.5) * (-(x - center).powi(2) / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// m/s²
    pub g: f64,
    /// m
    pub delta_x: f64,
    pub ratio: f64,
    pub source_mass: f64,
    pub separation: f64,
    pub time: f64,
}

impl DriftReport {
    pub fn compute(source_mass: f64, separation: f64, time: f64) -> Result<Self> {
        let g = gravitational_acceleration(source_mass, separation)?;
        let delta_x = classical_drift(g, time)?;
        let ratio = delta_x / separation;
        if !ratio.is_finite() {
            return Err(Error::NonFinite("drift ratio"));
        }
        Ok(Self {
            g,
            delta_x,
            ratio,
            source_mass,
            separation,
            time,
        })
    }
}

pub fn drift_report(params: &PhysicalParams) -> Result<DriftReport> {
    params.validate()?;
    DriftReport::compute(params.source_mass, params.separation, params.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ATOMIC_MASS_UNIT, HBAR};

    #[test]
    fn acceleration_at_reference_geometry() {
        let g = gravitational_acceleration(1e-14, 2e-4).unwrap();
        // 6.6743e-11 · 1e-14 / 4e-8
        assert!((g / 1.668_575e-17 - 1.0).abs() < 1e-12, "{g}");
        let g2 = gravitational_acceleration(1e-14, 4e-4).unwrap();
        assert!((g / g2 - 4.0).abs() < 1e-14);
        assert!(gravitational_acceleration(0.0, 2e-4).is_err());
    }

    #[test]
    fn drift_values() {
        assert_eq!(classical_drift(1.0, 0.0).unwrap(), 0.0);
        let dx = classical_drift(1.669e-17, 2.0).unwrap();
        assert!((dx - 3.338e-17).abs() < 1e-28);
        assert!(classical_drift(1.0, -1.0).is_err());
    }

    #[test]
    fn drift_report_ratio_near_1e_minus_13() {
        let r = DriftReport::compute(1e-14, 2e-4, 2.0).unwrap();
        // g t² / (2 d) = 1.668575e-17 · 4 / 4e-4
        assert!((r.ratio / 1.668_575e-13 - 1.0).abs() < 1e-12, "{}", r.ratio);
        assert_eq!(DriftReport::compute(1e-14, 2e-4, 0.0).unwrap().ratio, 0.0);
        let far = DriftReport::compute(1e-14, 2e-3, 2.0).unwrap();
        assert!((far.ratio / r.ratio - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn sigma_scaled_values() {
        assert_eq!(sigma_t(1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
        assert!((sigma_t(1.0, 1.0, 2.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let big = 1e9;
        assert!((sigma_t(1.0, 1.0, big, 1.0).unwrap() / big - 0.5).abs() < 1e-15);
        assert!(sigma_t(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn spreading_speed_values() {
        assert_eq!(spreading_speed(1.0, 1.0, 1.0).unwrap(), 0.5);
        let v = spreading_speed(1.66e-27, 1e-6, HBAR).unwrap();
        // 1.054571817e-34 / (2 · 1.66e-27 · 1e-6)
        assert!((v / 3.176_421_135_5e-2 - 1.0).abs() < 1e-9, "{v}");
        let v2 = spreading_speed(1.66e-27, 2e-6, HBAR).unwrap();
        assert_eq!(v / v2, 2.0);
    }

    #[test]
    fn density_peak_and_normalization() {
        let p = PhysicalParams::new(ATOMIC_MASS_UNIT, 1e-14, 2e-4, 1e-6, 0.0).unwrap();
        let peak = gaussian_density(0.0, 0.0, &p).unwrap();
        assert!((peak / (2.0 * PI * 1e-12f64).powf(-1.5) - 1.0).abs() < 1e-14);

        // Simpson quadrature of 4πr²ρ out to 12σ.
        for &t in &[0.0, 1e-5, 3e-4] {
            let s = sigma_t(p.packet_radius, p.particle_mass, t, p.hbar).unwrap();
            let n = 20_000;
            let h = 12.0 * s / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let r = i as f64 * h;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * 4.0 * PI * r * r * gaussian_density(r, t, &p).unwrap();
            }
            assert!((acc * h / 3.0 - 1.0).abs() < 1e-8);
        }
    }
}

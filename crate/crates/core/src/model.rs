//! Physical constants, experiment parameters and the dimensionless unit system.
//!
//! Numerical work runs in units where ħ = 1, the particle mass is 1 and lengths
//! are measured in packet radii. SI values only appear at the edges.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Newtonian constant of gravitation, CODATA 2018 (m³·kg⁻¹·s⁻²).
pub const G_NEWTON: f64 = 6.674_30e-11;
/// Reduced Planck constant, CODATA 2018 (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Atomic mass constant, CODATA 2018 (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// SI-valued experiment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Mass of the propagating particle (kg).
    pub particle_mass: f64,
    /// Mass of the gravitating source (kg). Zero switches gravity off.
    pub source_mass: f64,
    /// Separation between the closest pair of modes (m).
    pub separation: f64,
    /// Initial packet radius (m).
    pub packet_radius: f64,
    /// Evolution time (s).
    pub time: f64,
    pub hbar: f64,
    pub g_newton: f64,
    pub speed_of_light: f64,
}

impl PhysicalParams {
    /// Builds parameters with CODATA constants and validates them.
    pub fn new(
        particle_mass: f64,
        source_mass: f64,
        separation: f64,
        packet_radius: f64,
        time: f64,
    ) -> Result<Self> {
        let params = Self {
            particle_mass,
            source_mass,
            separation,
            packet_radius,
            time,
            hbar: HBAR,
            g_newton: G_NEWTON,
            speed_of_light: SPEED_OF_LIGHT,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("particle_mass", self.particle_mass)?;
        require_non_negative("source_mass", self.source_mass)?;
        require_positive("separation", self.separation)?;
        require_positive("packet_radius", self.packet_radius)?;
        require_non_negative("time", self.time)?;
        require_positive("hbar", self.hbar)?;
        require_positive("g_newton", self.g_newton)?;
        require_positive("speed_of_light", self.speed_of_light)?;
        if self.packet_radius >= 0.5 * self.separation {
            return Err(Error::param(
                "packet_radius",
                format!(
                    "packets overlap initially: R = {} must be < d/2 = {}",
                    self.packet_radius,
                    0.5 * self.separation
                ),
            ));
        }
        Ok(())
    }

    pub fn with_time(mut self, time: f64) -> Result<Self> {
        self.time = time;
        self.validate()?;
        Ok(self)
    }

    pub fn with_source_mass(mut self, source_mass: f64) -> Result<Self> {
        self.source_mass = source_mass;
        self.validate()?;
        Ok(self)
    }

    pub fn scaled(&self) -> Result<ScaledUnits> {
        to_scaled(self)
    }
}

/// Conversion between SI and the internal dimensionless system.
///
/// `time_scale` is the spreading time 2mR²/ħ. The internal clock ticks in
/// units of half of it (mR²/ħ), which is what makes ħ = m = 1 hold exactly;
/// the conversion methods account for that factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledUnits {
    /// L0 = R (m).
    pub length_scale: f64,
    /// T0 = 2mR²/ħ (s).
    pub time_scale: f64,
    /// E0 = ħ/T0 (J).
    pub energy_scale: f64,
    pub mass: f64,
    pub hbar: f64,
}

/// Builds the scaling for the particle mass and packet radius of `params`.
pub fn to_scaled(params: &PhysicalParams) -> Result<ScaledUnits> {
    params.validate()?;
    ScaledUnits::new(params.particle_mass, params.packet_radius, params.hbar)
}

impl ScaledUnits {
    pub fn new(mass: f64, radius: f64, hbar: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("radius", radius)?;
        require_positive("hbar", hbar)?;
        let time_scale = 2.0 * mass * radius * radius / hbar;
        let units = Self {
            length_scale: radius,
            time_scale,
            energy_scale: hbar / time_scale,
            mass,
            hbar,
        };
        if !(units.time_scale.is_finite()
            && units.energy_scale.is_finite()
            && units.time_scale > 0.0
            && units.energy_scale > 0.0)
        {
            return Err(Error::param(
                "radius",
                "derived scales are not representable",
            ));
        }
        Ok(units)
    }

    /// SI seconds per internal time unit (mR²/ħ).
    pub fn internal_time_unit(&self) -> f64 {
        0.5 * self.time_scale
    }

    /// SI joules per internal energy unit (ħ²/(mR²)).
    pub fn internal_energy_unit(&self) -> f64 {
        self.hbar / self.internal_time_unit()
    }

    pub fn length_to_scaled(&self, x: f64) -> f64 {
        x / self.length_scale
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length_scale
    }

    pub fn time_to_scaled(&self, t: f64) -> f64 {
        t / self.internal_time_unit()
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.internal_time_unit()
    }

    pub fn energy_to_scaled(&self, e: f64) -> f64 {
        e / self.internal_energy_unit()
    }

    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.internal_energy_unit()
    }

    pub fn acceleration_to_scaled(&self, a: f64) -> f64 {
        let tau = self.internal_time_unit();
        a * tau * tau / self.length_scale
    }

    pub fn acceleration_to_si(&self, a: f64) -> f64 {
        let tau = self.internal_time_unit();
        a * self.length_scale / (tau * tau)
    }

    /// Wavenumber (1/m) to inverse packet radii.
    pub fn wavenumber_to_scaled(&self, k: f64) -> f64 {
        k * self.length_scale
    }
}

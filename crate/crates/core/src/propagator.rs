//! Split-step spectral propagation on 1D cartesian and radial grids.
//!
//! Scaled units: ħ = m = 1, so the kinetic operator is k²/2.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::grid::{Geometry, Grid1D, Spectral, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Free,
    /// V(x) = offset + g·(x − origin); the force is −g.
    UniformField {
        g: f64,
        origin: f64,
        offset: f64,
    },
    /// V(x) = −coupling/√((x − center)² + softening²)
    SoftenedPointSource {
        coupling: f64,
        center: f64,
        softening: f64,
    },
    /// −strength·δ(x), carried by the sample nearest the origin.
    DeltaWell {
        strength: f64,
    },
    /// −depth for |x| < width/2.
    SquareWell {
        depth: f64,
        width: f64,
    },
}

impl Potential {
    pub fn uniform(g: f64) -> Self {
        Potential::UniformField {
            g,
            origin: 0.0,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        match *self {
            Potential::Free => Ok(()),
            Potential::UniformField { g, origin, offset } => {
                finite("g", g)?;
                finite("origin", origin)?;
                finite("offset", offset)
            }
            Potential::SoftenedPointSource {
                coupling,
                center,
                softening,
            } => {
                finite("coupling", coupling)?;
                finite("center", center)?;
                require_positive("softening", softening)
            }
            Potential::DeltaWell { strength } => finite("strength", strength),
            Potential::SquareWell { depth, width } => {
                finite("depth", depth)?;
                require_positive("width", width)
            }
        }
    }

    /// Potential energy sampled at grid point `j`.
    pub fn sample(&self, grid: &Grid1D, j: usize) -> f64 {
        let x = grid.x(j);
        match *self {
            Potential::Free => 0.0,
            Potential::UniformField { g, origin, offset } => offset + g * (x - origin),
            Potential::SoftenedPointSource {
                coupling,
                center,
                softening,
            } => -coupling / (x - center).hypot(softening),
            Potential::DeltaWell { strength } => {
                if j == grid.origin_index() {
                    -strength / grid.dx
                } else {
                    0.0
                }
            }
            Potential::SquareWell { depth, width } => {
                if x.abs() < 0.5 * width {
                    -depth
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Potential::Free)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Strang,
    ExactFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub total_time: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
}

impl EvolutionSpec {
    pub fn strang(total_time: f64, n_steps: usize) -> Self {
        Self {
            total_time,
            n_steps,
            scheme: Scheme::Strang,
        }
    }

    pub fn exact_free(total_time: f64) -> Self {
        Self {
            total_time,
            n_steps: 1,
            scheme: Scheme::ExactFree,
        }
    }

    fn validate(&self, potential: &Potential) -> Result<()> {
        require_non_negative("total_time", self.total_time)?;
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be >= 1"));
        }
        if self.scheme == Scheme::ExactFree && !potential.is_free() {
            return Err(Error::param(
                "scheme",
                "exact-free evolution requires the free potential",
            ));
        }
        Ok(())
    }
}

/// Fraction of the half-width, at each end, treated as the edge band.
pub const EDGE_BAND_FRACTION: f64 = 1.0 / 32.0;
/// Probability allowed inside the edge band before a run is rejected.
pub const EDGE_PROBABILITY_LIMIT: f64 = 1e-8;

/// Evolved state plus how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolved {
    pub state: Wavefunction,
    pub spec: EvolutionSpec,
    pub potential: Potential,
    /// Largest edge-band probability seen during the run.
    pub max_edge_probability: f64,
}

/// ψ ∝ exp(−(x − c)²/(4R²) + i·k0·x), normalized on the grid.
pub fn initialize_gaussian(
    grid: &Grid1D,
    center: f64,
    width: f64,
    k0: f64,
) -> Result<Wavefunction> {
    require_positive("width", width)?;
    if width < 4.0 * grid.dx {
        return Err(Error::Unresolved(format!(
            "packet width {width} is below 4·dx = {}",
            4.0 * grid.dx
        )));
    }
    let margin = 10.0 * width;
    if center - margin < grid.x_min || center + margin > grid.x_max {
        return Err(Error::param(
            "center",
            format!("packet at {center} needs 10 widths ({margin}) of room inside the grid"),
        ));
    }
    let mut psi = Wavefunction::from_fn(*grid, Geometry::Cartesian, |x| {
        Complex64::from_polar(
            (-(x - center).powi(2) / (4.0 * width * width)).exp(),
            k0 * x,
        )
    })?;
    psi.normalize()?;
    Ok(psi)
}

/// u(r) = √(4π)·r·ψ(r) for the uniform ball, odd-extended over the full grid.
///
/// The sample containing r = R is weighted by the fraction of its cell that
/// lies inside the ball.
pub fn initialize_step_radial(grid: &Grid1D, radius: f64) -> Result<Wavefunction> {
    require_positive("radius", radius)?;
    if radius < 8.0 * grid.dx {
        return Err(Error::Unresolved(format!(
            "step radius {radius} is below 8·dx = {}",
            8.0 * grid.dx
        )));
    }
    if radius > 0.5 * grid.half_width() {
        return Err(Error::param(
            "radius",
            "step state must fit well inside the grid",
        ));
    }
    let amplitude = (3.0 / radius.powi(3)).sqrt();
    let dx = grid.dx;
    let mut psi = Wavefunction::from_fn(*grid, Geometry::Radial, |x| {
        let r = x.abs();
        let inside = ((radius - (r - 0.5 * dx)) / dx).clamp(0.0, 1.0);
        Complex64::new(x.signum() * amplitude * r * inside.sqrt(), 0.0)
    })?;
    let origin = grid.origin_index();
    psi.samples[origin] = Complex64::new(0.0, 0.0);
    psi.normalize()?;
    Ok(psi)
}

fn edge_probability(state: &Wavefunction) -> f64 {
    let n = state.grid.n_points;
    let band = ((EDGE_BAND_FRACTION * n as f64 / 2.0).ceil() as usize).max(2);
    let dx = state.grid.dx;
    let weight = |z: &Complex64| z.norm_sqr() * dx;
    let lower: f64 = state.samples[..band].iter().map(weight).sum();
    let upper: f64 = state.samples[n - band..].iter().map(weight).sum();
    match state.geometry {
        Geometry::Cartesian => lower + upper,
        // Only r > 0 carries probability.
        Geometry::Radial => upper,
    }
}

fn check_finite(samples: &[Complex64]) -> Result<()> {
    if samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("evolution"))
    }
}

/// Evolves `state` for `spec.total_time` under `potential`.
///
/// Fails when probability reaches the grid edge band or a value goes
/// non-finite.
pub fn evolve(
    state: &Wavefunction,
    potential: &Potential,
    spec: &EvolutionSpec,
) -> Result<Evolved> {
    potential.validate()?;
    spec.validate(potential)?;
    let grid = state.grid;
    let fft = Spectral::new(grid.n_points);
    let mut max_edge = edge_probability(state);
    let mut psi = state.samples.clone();

    match spec.scheme {
        Scheme::ExactFree => {
            free_phase_step(&mut psi, &grid, spec.total_time, &fft);
            check_finite(&psi)?;
        }
        Scheme::Strang => {
            let dt = spec.total_time / spec.n_steps as f64;
            let kinetic: Vec<Complex64> = grid
                .wavenumbers()
                .iter()
                .map(|k| Complex64::from_polar(1.0, -0.5 * k * k * dt))
                .collect();
            let half_kick: Vec<Complex64> = (0..grid.n_points)
                .map(|j| Complex64::from_polar(1.0, -0.5 * potential.sample(&grid, j) * dt))
                .collect();
            let full_kick: Vec<Complex64> = half_kick.iter().map(|z| z * z).collect();
            let check_every = (spec.n_steps / 64).max(1);

            apply(&mut psi, &half_kick);
            for step in 0..spec.n_steps {
                fft.forward(&mut psi);
                apply(&mut psi, &kinetic);
                fft.inverse(&mut psi);
                let last = step + 1 == spec.n_steps;
                apply(&mut psi, if last { &half_kick } else { &full_kick });
                if last || (step + 1) % check_every == 0 {
                    check_finite(&psi)?;
                    let snapshot = Wavefunction {
                        grid,
                        samples: psi.clone(),
                        geometry: state.geometry,
                    };
                    let edge = edge_probability(&snapshot);
                    max_edge = max_edge.max(edge);
                    if edge > EDGE_PROBABILITY_LIMIT {
                        return Err(Error::BoundaryContact {
                            weight: edge,
                            time: (step + 1) as f64 * dt,
                        });
                    }
                }
            }
        }
    }

    let evolved = Wavefunction::new(grid, psi, state.geometry)?;
    let edge = edge_probability(&evolved);
    max_edge = max_edge.max(edge);
    if edge > EDGE_PROBABILITY_LIMIT {
        return Err(Error::BoundaryContact {
            weight: edge,
            time: spec.total_time,
        });
    }
    Ok(Evolved {
        state: evolved,
        spec: *spec,
        potential: *potential,
        max_edge_probability: max_edge,
    })
}

fn apply(psi: &mut [Complex64], factors: &[Complex64]) {
    psi.iter_mut().zip(factors).for_each(|(z, f)| *z *= f);
}

fn free_phase_step(psi: &mut [Complex64], grid: &Grid1D, t: f64, fft: &Spectral) {
    fft.forward(psi);
    for (j, z) in psi.iter_mut().enumerate() {
        let k = grid.k(j);
        *z *= Complex64::from_polar(1.0, -0.5 * k * k * t);
    }
    fft.inverse(psi);
}

/// Free evolution by the exact momentum-space phase exp(−ik²T/2).
///
/// No edge check: the result is the exact periodic evolution on the grid.
/// Negative `t` runs backwards.
pub fn evolve_free_exact(state: &Wavefunction, t: f64) -> Result<Wavefunction> {
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    let fft = Spectral::new(state.grid.n_points);
    let mut psi = state.samples.clone();
    free_phase_step(&mut psi, &state.grid, t, &fft);
    Wavefunction::new(state.grid, psi, state.geometry)
}

pub fn norm(state: &Wavefunction) -> f64 {
    state.norm()
}

pub fn overlap(a: &Wavefunction, b: &Wavefunction) -> Result<Complex64> {
    a.overlap(b)
}

pub fn expectation_position(state: &Wavefunction) -> f64 {
    state.expectation_position()
}

/// ⟨φ|U_free(t)|φ⟩ for a 1D Gaussian of width R at rest: (1 + it/4R²)^(-1/2).
pub fn gaussian_free_stay_amplitude(width: f64, t: f64) -> Complex64 {
    (Complex64::new(1.0, t / (4.0 * width * width))).powf(-0.5)
}

/// Radial density ρ(r) = |u|²/(4πr²) at each positive-r sample.
pub fn radial_density(state: &Wavefunction) -> Vec<(f64, f64)> {
    let grid = state.grid;
    (grid.origin_index() + 1..grid.n_points)
        .map(|j| {
            let r = grid.x(j);
            (r, state.samples[j].norm_sqr() / (4.0 * PI * r * r))
        })
        .collect()
}

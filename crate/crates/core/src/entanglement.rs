//! Branch amplitudes α_ij, their determinant and the crossed-mode overlap for
//! two particles, each in a superposition of a left and a right mode.
//!
//! Each particle moves in the field of the other particle's branch position,
//! treated as a fixed classical source. At uniform-field order the two-body
//! potential separates, so α_ij is a product of one-particle stay amplitudes.
//! The pair energy −GmM/s is shared evenly between the two factors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::sigma_t;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::fit::fit_quadratic;
use crate::grid::{make_grid, Grid1D};
use crate::model::PhysicalParams;
use crate::propagator::{evolve, initialize_gaussian, EvolutionSpec, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Particle {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    L,
    R,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::L, Branch::R];

    pub fn index(self) -> usize {
        match self {
            Branch::L => 0,
            Branch::R => 1,
        }
    }
}

/// Mode centers (scaled) ordered 1L < 1R < 2L < 2R, and the common packet width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchConfig {
    pub x1l: f64,
    pub x1r: f64,
    pub x2l: f64,
    pub x2r: f64,
    pub width: f64,
}

impl BranchConfig {
    pub fn new(x1l: f64, x1r: f64, x2l: f64, x2r: f64, width: f64) -> Result<Self> {
        let c = Self {
            x1l,
            x1r,
            x2l,
            x2r,
            width,
        };
        c.validate()?;
        Ok(c)
    }

    /// Closest pair separated by `separation` around the origin; each
    /// particle's two modes are `branch_spacing` apart.
    pub fn symmetric(separation: f64, branch_spacing: f64, width: f64) -> Result<Self> {
        let h = 0.5 * separation;
        Self::new(-h - branch_spacing, -h, h, h + branch_spacing, width)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("width", self.width)?;
        let xs = [self.x1l, self.x1r, self.x2l, self.x2r];
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param(
                "centers",
                "mode centers must satisfy 1L < 1R < 2L < 2R",
            ));
        }
        Ok(())
    }

    pub fn center(&self, particle: Particle, branch: Branch) -> f64 {
        match (particle, branch) {
            (Particle::One, Branch::L) => self.x1l,
            (Particle::One, Branch::R) => self.x1r,
            (Particle::Two, Branch::L) => self.x2l,
            (Particle::Two, Branch::R) => self.x2r,
        }
    }

    /// d = x_2L − x_1R
    pub fn separation(&self) -> f64 {
        self.x2l - self.x1r
    }

    /// Center separation when particle 1 is in branch i and particle 2 in j.
    pub fn pair_separation(&self, i: Branch, j: Branch) -> f64 {
        self.center(Particle::Two, j) - self.center(Particle::One, i)
    }
}

/// Newtonian coupling in scaled units: acceleration GM/s², pair energy −GmM/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityCoupling {
    /// G·M in scaled units (length³/time²).
    pub source_strength: f64,
    /// G·m·M in scaled units (energy·length).
    pub pair_strength: f64,
}

impl GravityCoupling {
    pub fn none() -> Self {
        Self {
            source_strength: 0.0,
            pair_strength: 0.0,
        }
    }

    pub fn from_params(params: &PhysicalParams) -> Result<Self> {
        let units = params.scaled()?;
        let l0 = units.length_scale;
        let gm = params.g_newton * params.source_mass;
        let source_strength = units.acceleration_to_scaled(gm / (l0 * l0));
        let pair_strength = units.energy_to_scaled(gm * params.particle_mass / l0);
        Ok(Self {
            source_strength,
            pair_strength,
        })
    }

    pub fn acceleration(&self, separation: f64) -> f64 {
        self.source_strength / (separation * separation)
    }

    pub fn pair_energy(&self, separation: f64) -> f64 {
        -self.pair_strength / separation
    }
}

/// Potential felt by `particle` in `own` branch while the other particle sits
/// in `other` branch, in global coordinates.
pub fn branch_potential(
    particle: Particle,
    own: Branch,
    other: Branch,
    config: &BranchConfig,
    coupling: &GravityCoupling,
) -> Result<Potential> {
    config.validate()?;
    let (i, j) = match particle {
        Particle::One => (own, other),
        Particle::Two => (other, own),
    };
    let s = config.pair_separation(i, j);
    if !(s > 0.0) {
        return Err(Error::param("centers", "coincident branch centers"));
    }
    let a = coupling.acceleration(s);
    // Particle 1 is pulled towards +x, particle 2 towards −x; force = −g.
    let g = match particle {
        Particle::One => -a,
        Particle::Two => a,
    };
    Ok(Potential::UniformField {
        g,
        origin: config.center(particle, own),
        offset: 0.5 * coupling.pair_energy(s),
    })
}

/// How the source's field is modelled for the crossed overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldModel {
    Uniform,
    /// Full −GmM/√(Δx² + ε²) potential.
    SoftenedPointSource {
        softening: f64,
    },
}

/// Grid and stepping used for every one-particle evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSettings {
    pub n_steps: usize,
    /// Lower bound on grid points; raised to keep dx ≤ width/8.
    pub min_points: usize,
    /// Grid half-width in units of the evolved packet width σ_t.
    pub half_width_sigmas: f64,
    /// Crossed overlaps are sampled for target displacements in [0, this·σ_t].
    pub fit_range_sigmas: f64,
    pub fit_samples: usize,
}

impl Default for AmplitudeSettings {
    fn default() -> Self {
        Self {
            n_steps: 200,
            min_points: 1024,
            half_width_sigmas: 14.0,
            fit_range_sigmas: 6.0,
            fit_samples: 13,
        }
    }
}

/// log₁₀|O_cross| below which the crossed channel is negligible.
pub const NEGLIGIBLE_LOG10: f64 = -20.0;
/// |D| below which the amplitude matrix counts as factorized.
pub const FACTORIZED_DETERMINANT: f64 = 1e-12;

/// A one-particle evolution in a frame centred on the initial mode.
struct LocalRun {
    grid: Grid1D,
    initial: crate::grid::Wavefunction,
    evolved: crate::grid::Wavefunction,
}

fn local_run(
    width: f64,
    potential: Potential,
    time: f64,
    extra_reach: f64,
    settings: &AmplitudeSettings,
) -> Result<LocalRun> {
    let sigma = sigma_t(width, 1.0, time, 1.0)?;
    let drift = match potential {
        Potential::UniformField { g, .. } => 0.5 * g.abs() * time * time,
        _ => 0.0,
    };
    let half_width = settings.half_width_sigmas * sigma + 2.0 * drift + extra_reach + 10.0 * width;
    let needed = (2.0 * half_width / (width / 8.0)).ceil() as usize;
    let n_points = needed.max(settings.min_points).max(64).next_power_of_two();
    let grid = make_grid(half_width, n_points)?;
    let initial = initialize_gaussian(&grid, 0.0, width, 0.0)?;
    let evolved = evolve(
        &initial,
        &potential,
        &EvolutionSpec::strang(time, settings.n_steps),
    )?
    .state;
    Ok(LocalRun {
        grid,
        initial,
        evolved,
    })
}

/// Moves a global-coordinate potential into the frame centred at `center`.
fn to_local(potential: Potential, center: f64) -> Potential {
    match potential {
        Potential::UniformField { g, origin, offset } => Potential::UniformField {
            g,
            origin: origin - center,
            offset,
        },
        Potential::SoftenedPointSource {
            coupling,
            center: c,
            softening,
        } => Potential::SoftenedPointSource {
            coupling,
            center: c - center,
            softening,
        },
        other => other,
    }
}

/// ⟨φ|U|φ⟩ for the mode of `particle` in branch `own` with the partner in `other`.
pub fn stay_amplitude(
    particle: Particle,
    own: Branch,
    other: Branch,
    config: &BranchConfig,
    coupling: &GravityCoupling,
    time: f64,
    settings: &AmplitudeSettings,
) -> Result<Complex64> {
    require_non_negative("time", time)?;
    let v = branch_potential(particle, own, other, config, coupling)?;
    let run = local_run(
        config.width,
        to_local(v, config.center(particle, own)),
        time,
        0.0,
        settings,
    )?;
    run.initial.overlap(&run.evolved)
}

/// α_ij = ⟨1i|U|1i⟩·⟨2j|U|2j⟩.
pub fn alpha_entry(
    i: Branch,
    j: Branch,
    config: &BranchConfig,
    coupling: &GravityCoupling,
    time: f64,
    settings: &AmplitudeSettings,
) -> Result<Complex64> {
    let a = stay_amplitude(Particle::One, i, j, config, coupling, time, settings)?;
    let b = stay_amplitude(Particle::Two, j, i, config, coupling, time, settings)?;
    Ok(a * b)
}

/// α_LL·α_RR − α_RL·α_LR for `alpha[i][j]` indexed L = 0, R = 1.
pub fn determinant(alpha: &[[Complex64; 2]; 2]) -> Complex64 {
    alpha[0][0] * alpha[1][1] - alpha[1][0] * alpha[0][1]
}

/// Magnitude kept as a natural log so Gaussian-small values survive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAmplitude {
    pub ln_abs: f64,
    /// Phase, when the value was evaluated directly.
    pub arg: Option<f64>,
}

impl LogAmplitude {
    pub fn from_complex(z: Complex64) -> Self {
        Self {
            ln_abs: z.norm().ln(),
            arg: Some(z.arg()),
        }
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }

    /// |z|, which underflows to zero below ~1e-308.
    pub fn magnitude(&self) -> f64 {
        self.ln_abs.exp()
    }

    /// Whether reports should carry this value in log space.
    pub fn needs_log_space(&self) -> bool {
        self.log10_abs() < -300.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMethod {
    Direct,
    /// Quadratic fit of ln|O| against target displacement, extrapolated.
    LogExtrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossOverlap {
    pub value: LogAmplitude,
    pub method: OverlapMethod,
    /// Max deviation of the ln|O| quadratic fit, as a fraction of the ln|O| range.
    pub fit_residual: f64,
    /// (displacement, ln|O|) samples behind the fit.
    pub samples: Vec<(f64, f64)>,
    pub fit_coefficients: [f64; 3],
}

/// ⟨φ_1R(0) displaced by s| U |φ_1R(0)⟩ sampled over s, for the packet 1R
/// evolving under its branch field.
pub struct CrossedProfile {
    run: LocalRun,
    width: f64,
    fit_range: f64,
}

impl CrossedProfile {
    pub fn new(
        config: &BranchConfig,
        coupling: &GravityCoupling,
        time: f64,
        model: FieldModel,
        settings: &AmplitudeSettings,
    ) -> Result<Self> {
        require_non_negative("time", time)?;
        let sigma = sigma_t(config.width, 1.0, time, 1.0)?;
        let fit_range = settings.fit_range_sigmas * sigma;
        let center = config.x1r;
        let reach = fit_range.max(if config.separation() <= fit_range {
            config.separation()
        } else {
            0.0
        });
        let potential = match model {
            FieldModel::Uniform => {
                branch_potential(Particle::One, Branch::R, Branch::L, config, coupling)?
            }
            FieldModel::SoftenedPointSource { softening } => {
                require_positive("softening", softening)?;
                Potential::SoftenedPointSource {
                    coupling: coupling.source_strength,
                    center: config.x2l,
                    softening,
                }
            }
        };
        let run = local_run(
            config.width,
            to_local(potential, center),
            time,
            reach,
            settings,
        )?;
        Ok(Self {
            run,
            width: config.width,
            fit_range,
        })
    }

    /// Overlap of the evolved packet with the initial mode shifted by `s`.
    pub fn at(&self, s: f64) -> Result<Complex64> {
        let target = initialize_gaussian(&self.run.grid, s, self.width, 0.0)?;
        target.overlap(&self.run.evolved)
    }

    pub fn fit_range(&self) -> f64 {
        self.fit_range
    }

    /// Overlap with a mode a distance `d` away: direct inside the sampled
    /// range, otherwise extrapolated from the quadratic ln|O| fit.
    pub fn crossed(&self, d: f64, samples: usize) -> Result<CrossOverlap> {
        let n = samples.max(4);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let s = self.fit_range * k as f64 / (n - 1) as f64;
                self.at(s).map(|z| (s, z.norm().ln()))
            })
            .collect::<Result<_>>()?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        let fit = fit_quadratic(&xs, &ys)?;
        let range = ys.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
            - ys.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let fit_residual = if range > 0.0 {
            fit.max_residual / range
        } else {
            0.0
        };
        let (value, method) = if d <= self.fit_range {
            (
                LogAmplitude::from_complex(self.at(d)?),
                OverlapMethod::Direct,
            )
        } else {
            (
                LogAmplitude {
                    ln_abs: fit.eval(d),
                    arg: None,
                },
                OverlapMethod::LogExtrapolated,
            )
        };
        Ok(CrossOverlap {
            value,
            method,
            fit_residual,
            samples: pts,
            fit_coefficients: fit.coefficients,
        })
    }
}

/// ⟨φ_2L(0)|U|φ_1R(0)⟩ with U the evolution of packet 1R in its branch field.
pub fn cross_overlap(
    config: &BranchConfig,
    coupling: &GravityCoupling,
    time: f64,
    model: FieldModel,
    settings: &AmplitudeSettings,
) -> Result<CrossOverlap> {
    CrossedProfile::new(config, coupling, time, model, settings)?
        .crossed(config.separation(), settings.fit_samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossedVerdict {
    Negligible,
    NonNegligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeterminantVerdict {
    NoEntanglementChannel,
    Nonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalVerdict {
    /// Drift plus three widths stays inside half the separation.
    PacketsStaySeparated,
    PacketsApproach,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub crossed_channel: CrossedVerdict,
    pub determinant: DeterminantVerdict,
    pub classical_estimate: ClassicalVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCheck {
    /// arg(α_ij) with the free-spreading phase removed.
    pub measured: f64,
    /// −V_ij·t
    pub action_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeMatrix {
    /// alpha[i][j], L = 0, R = 1.
    pub alpha: [[Complex64; 2]; 2],
    pub determinant: Complex64,
    pub cross: CrossOverlap,
    pub time: f64,
    pub settings: AmplitudeSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub matrix: AmplitudeMatrix,
    /// δx/d for the closest pair.
    pub drift_ratio: f64,
    pub sigma_over_d: f64,
    pub phases: [[PhaseCheck; 2]; 2],
    pub verdicts: Verdicts,
}

/// All four α entries, the determinant, the crossed overlap and verdicts.
///
/// The one-particle evolutions run in parallel; the result does not depend
/// on scheduling.
pub fn entanglement_report(
    config: &BranchConfig,
    coupling: &GravityCoupling,
    time: f64,
    settings: &AmplitudeSettings,
) -> Result<EntanglementReport> {
    config.validate()?;
    require_non_negative("time", time)?;
    let jobs: Vec<(Particle, Branch, Branch)> = [Particle::One, Particle::Two]
        .into_iter()
        .flat_map(|p| {
            Branch::BOTH
                .into_iter()
                .flat_map(move |a| Branch::BOTH.into_iter().map(move |b| (p, a, b)))
        })
        .collect();
    let (factors, cross) = rayon::join(
        || {
            jobs.par_iter()
                .map(|&(p, own, other)| {
                    stay_amplitude(p, own, other, config, coupling, time, settings)
                })
                .collect::<Result<Vec<_>>>()
        },
        || cross_overlap(config, coupling, time, FieldModel::Uniform, settings),
    );
    let factors = factors?;
    let cross = cross?;
    let factor = |p: Particle, own: Branch, other: Branch| {
        let idx = jobs
            .iter()
            .position(|&job| job == (p, own, other))
            .expect("job list is complete");
        factors[idx]
    };

    let mut alpha = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut phases = [[PhaseCheck {
        measured: 0.0,
        action_estimate: 0.0,
    }; 2]; 2];
    let free = crate::propagator::gaussian_free_stay_amplitude(config.width, time);
    for i in Branch::BOTH {
        for j in Branch::BOTH {
            let a = factor(Particle::One, i, j) * factor(Particle::Two, j, i);
            alpha[i.index()][j.index()] = a;
            phases[i.index()][j.index()] = PhaseCheck {
                measured: (a / (free * free)).arg(),
                action_estimate: -coupling.pair_energy(config.pair_separation(i, j)) * time,
            };
        }
    }
    let det = determinant(&alpha);

    let d = config.separation();
    let g = coupling.acceleration(d);
    let drift = 0.5 * g * time * time;
    let sigma = sigma_t(config.width, 1.0, time, 1.0)?;
    let verdicts = Verdicts {
        crossed_channel: if cross.value.log10_abs() < NEGLIGIBLE_LOG10 {
            CrossedVerdict::Negligible
        } else {
            CrossedVerdict::NonNegligible
        },
        determinant: if det.norm() < FACTORIZED_DETERMINANT {
            DeterminantVerdict::NoEntanglementChannel
        } else {
            DeterminantVerdict::Nonzero
        },
        classical_estimate: if drift + 3.0 * sigma < 0.5 * d {
            ClassicalVerdict::PacketsStaySeparated
        } else {
            ClassicalVerdict::PacketsApproach
        },
    };
    Ok(EntanglementReport {
        matrix: AmplitudeMatrix {
            alpha,
            determinant: det,
            cross,
            time,
            settings: *settings,
        },
        drift_ratio: drift / d,
        sigma_over_d: sigma / d,
        phases,
        verdicts,
    })
}

/// Scaled branch geometry, coupling and time for SI parameters.
pub fn scaled_setup(
    params: &PhysicalParams,
    branch_spacing: f64,
) -> Result<(BranchConfig, GravityCoupling, f64)> {
    let units = params.scaled()?;
    require_positive("branch_spacing", branch_spacing)?;
    let config = BranchConfig::symmetric(
        units.length_to_scaled(params.separation),
        units.length_to_scaled(branch_spacing),
        1.0,
    )?;
    Ok((
        config,
        GravityCoupling::from_params(params)?,
        units.time_to_scaled(params.time),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> BranchConfig {
        BranchConfig::symmetric(30.0, 20.0, 1.0).unwrap()
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(BranchConfig::new(0.0, 1.0, 0.5, 2.0, 1.0).is_err());
        assert!(BranchConfig::new(0.0, 1.0, 1.0, 2.0, 1.0).is_err());
        assert_eq!(config().separation(), 30.0);
    }

    #[test]
    fn branch_fields() {
        let c = config();
        let k = GravityCoupling {
            source_strength: 900.0,
            pair_strength: 1.0,
        };
        let near = branch_potential(Particle::One, Branch::R, Branch::L, &c, &k).unwrap();
        let Potential::UniformField { g, .. } = near else {
            panic!()
        };
        assert!((g + 1.0).abs() < 1e-15);
        let far = branch_potential(Particle::One, Branch::L, Branch::R, &c, &k).unwrap();
        let Potential::UniformField { g: g_far, .. } = far else {
            panic!()
        };
        assert!((g_far + 900.0 / 70.0f64.powi(2)).abs() < 1e-15);
        let mirror = branch_potential(Particle::Two, Branch::L, Branch::R, &c, &k).unwrap();
        let Potential::UniformField { g: g2, .. } = mirror else {
            panic!()
        };
        assert_eq!(g2, -g);
    }

    #[test]
    fn determinant_algebra() {
        let one = Complex64::new(1.0, 0.0);
        let d = determinant(&[
            [one, one],
            [one, Complex64::from_polar(1.0, std::f64::consts::PI)],
        ]);
        assert!((d - Complex64::new(-2.0, 0.0)).norm() < 1e-15);

        let a = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7)];
        let b = [Complex64::new(1.1, -0.4), Complex64::new(0.5, 0.5)];
        let rank_one = [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
        assert!(determinant(&rank_one).norm() < 1e-15);

        let phi = [[0.3, 1.1], [-0.4, 2.0]];
        let m = phi.map(|row| row.map(|p| Complex64::from_polar(1.0, p)));
        let expected = 2.0
            * ((phi[0][0] + phi[1][1] - phi[0][1] - phi[1][0]) / 2.0)
                .sin()
                .abs();
        assert!((determinant(&m).norm() - expected).abs() < 1e-14);
    }

    #[test]
    fn log_amplitude_helpers() {
        let tiny = LogAmplitude {
            ln_abs: -2000.0,
            arg: None,
        };
        assert!(tiny.needs_log_space());
        assert_eq!(tiny.magnitude(), 0.0);
        assert!((tiny.log10_abs() + 2000.0 / std::f64::consts::LN_10).abs() < 1e-12);
    }
}

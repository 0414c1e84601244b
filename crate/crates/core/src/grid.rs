//! Uniform 1D grids with their dual momentum grid, and sampled wavefunctions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Symmetric grid on [-half_width, half_width) with a power-of-two point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
}

pub fn make_grid(half_width: f64, n_points: usize) -> Result<Grid1D> {
    require_positive("half_width", half_width)?;
    if n_points < 64 || !n_points.is_power_of_two() {
        return Err(Error::BadPointCount(n_points));
    }
    Ok(Grid1D {
        x_min: -half_width,
        x_max: half_width,
        n_points,
        dx: 2.0 * half_width / n_points as f64,
    })
}

impl Grid1D {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_max - self.x_min)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Momentum spacing 2π/(n·dx).
    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dx)
    }

    /// Nyquist wavenumber π/dx.
    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }

    /// Wavenumber of DFT bin `j` in standard FFT ordering.
    pub fn k(&self, j: usize) -> f64 {
        let n = self.n_points as isize;
        let j = j as isize;
        let m = if j < n / 2 { j } else { j - n };
        m as f64 * self.dk()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.k(j)).collect()
    }

    /// Index of the sample at x = 0.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    pub(crate) fn same_as(&self, other: &Grid1D) -> bool {
        self.n_points == other.n_points
            && (self.x_min - other.x_min).abs() <= 1e-14 * self.half_width()
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
    }
}

/// Forward/inverse unnormalized FFT pair of one size.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/n factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Cartesian,
    /// u(r) = √(4π)·r·ψ(r) stored as an odd function on the full line; only
    /// r > 0 carries probability.
    Radial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: Grid1D,
    pub samples: Vec<Complex64>,
    pub geometry: Geometry,
}

impl Wavefunction {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>, geometry: Geometry) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        if samples
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("wavefunction samples"));
        }
        Ok(Self {
            grid,
            samples,
            geometry,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid1D, geometry: Geometry, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = grid.positions().map(f).collect();
        Self::new(grid, samples, geometry)
    }

    /// Per-sample quadrature weight: dx, or only on r > 0 for radial states.
    fn weight(&self, j: usize) -> f64 {
        match self.geometry {
            Geometry::Cartesian => self.grid.dx,
            Geometry::Radial => {
                if self.grid.x(j) > 0.5 * self.grid.dx {
                    self.grid.dx
                } else {
                    0.0
                }
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .map(|(j, z)| z.norm_sqr() * self.weight(j))
            .sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite("normalization"));
        }
        let s = 1.0 / norm.sqrt();
        self.samples.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    /// ⟨a|b⟩ as a plain Riemann sum.
    pub fn overlap(&self, other: &Wavefunction) -> Result<Complex64> {
        if !self.grid.same_as(&other.grid) || self.geometry != other.geometry {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .map(|(j, (a, b))| a.conj() * b * self.weight(j))
            .sum())
    }

    /// ⟨x⟩, or ⟨r⟩ for radial states. Uses the stored normalization.
    pub fn expectation_position(&self) -> f64 {
        let n = self.norm();
        self.moment(1) / n
    }

    pub fn variance_position(&self) -> f64 {
        let n = self.norm();
        let mean = self.moment(1) / n;
        self.moment(2) / n - mean * mean
    }

    fn moment(&self, order: i32) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .map(|(j, z)| self.grid.x(j).powi(order) * z.norm_sqr() * self.weight(j))
            .sum()
    }

    /// Probability density in the state's own measure: |ψ|² (cartesian) or
    /// |u|² per unit r (radial).
    pub fn density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Momentum-space samples in FFT ordering, scaled so Σ|φ_k|²·dk = Σ|ψ_j|²·dx.
    pub fn to_momentum(&self, fft: &Spectral) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        fft.forward(&mut buf);
        let scale = self.grid.dx / (2.0 * std::f64::consts::PI).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    /// Inverse of [`Wavefunction::to_momentum`].
    pub fn from_momentum(
        grid: Grid1D,
        geometry: Geometry,
        mut phi: Vec<Complex64>,
        fft: &Spectral,
    ) -> Result<Self> {
        let scale = (2.0 * std::f64::consts::PI).sqrt() / grid.dx;
        phi.iter_mut().for_each(|z| *z *= scale);
        fft.inverse(&mut phi);
        Self::new(grid, phi, geometry)
    }

    /// Momentum expectation ⟨k⟩ from the spectral representation.
    pub fn expectation_momentum(&self) -> f64 {
        let fft = Spectral::new(self.grid.n_points);
        let phi = self.to_momentum(&fft);
        let dk = self.grid.dk();
        let (num, den) = phi
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(num, den), (j, z)| {
                let w = z.norm_sqr() * dk;
                (num + self.grid.k(j) * w, den + w)
            });
        num / den
    }

    pub fn variance_momentum(&self) -> f64 {
        let fft = Spectral::new(self.grid.n_points);
        let phi = self.to_momentum(&fft);
        let dk = self.grid.dk();
        let (m0, m1, m2) = phi.iter().enumerate().fold((0.0, 0.0, 0.0), |acc, (j, z)| {
            let w = z.norm_sqr() * dk;
            let k = self.grid.k(j);
            (acc.0 + w, acc.1 + k * w, acc.2 + k * k * w)
        });
        m2 / m0 - (m1 / m0).powi(2)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
            geometry: self.geometry,
        }
    }

    /// Relative L2 distance ‖a − b‖ / ‖b‖ over the raw samples.
    pub fn relative_l2_distance(&self, reference: &Wavefunction) -> Result<f64> {
        if !self.grid.same_as(&reference.grid) {
            return Err(Error::GridMismatch);
        }
        let (diff, base) = self
            .samples
            .iter()
            .zip(&reference.samples)
            .fold((0.0, 0.0), |(d, b), (x, y)| {
                (d + (x - y).norm_sqr(), b + y.norm_sqr())
            });
        Ok((diff / base).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacings() {
        let g = make_grid(8.0, 256).unwrap();
        assert_eq!(g.dx, 0.0625);
        assert!((g.k_max() - 50.265_482_457_436_69).abs() < 1e-12);
        assert!((g.dk() - std::f64::consts::FRAC_PI_8).abs() < 1e-15);
        assert_eq!(g.x(0), -8.0);
        assert_eq!(g.x(g.origin_index()), 0.0);
        assert_eq!(g.k(128), -g.k_max());
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert_eq!(make_grid(8.0, 100), Err(Error::BadPointCount(100)));
        assert_eq!(make_grid(8.0, 32), Err(Error::BadPointCount(32)));
        assert!(make_grid(0.0, 256).is_err());
    }

    #[test]
    fn fft_round_trip() {
        let g = make_grid(10.0, 512).unwrap();
        let psi = Wavefunction::from_fn(g, Geometry::Cartesian, |x| {
            Complex64::new(
                (-x * x).exp() * (3.0 * x).cos(),
                0.3 * (-(x - 1.0).powi(2)).exp(),
            )
        })
        .unwrap();
        let fft = Spectral::new(g.n_points);
        let back = Wavefunction::from_momentum(g, Geometry::Cartesian, psi.to_momentum(&fft), &fft)
            .unwrap();
        assert!(back.relative_l2_distance(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn overlap_with_self_is_norm() {
        let g = make_grid(10.0, 256).unwrap();
        let psi = Wavefunction::from_fn(g, Geometry::Cartesian, |x| {
            Complex64::from_polar((-x * x / 2.0).exp(), x)
        })
        .unwrap();
        let o = psi.overlap(&psi).unwrap();
        assert!((o.re - psi.norm()).abs() < 1e-14 && o.im.abs() < 1e-14);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Wavefunction::from_fn(make_grid(10.0, 256).unwrap(), Geometry::Cartesian, |_| {
            1.0.into()
        })
        .unwrap();
        let b = Wavefunction::from_fn(make_grid(12.0, 256).unwrap(), Geometry::Cartesian, |_| {
            1.0.into()
        })
        .unwrap();
        assert_eq!(a.overlap(&b), Err(Error::GridMismatch));
    }
}

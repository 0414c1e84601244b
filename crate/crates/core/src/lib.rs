//! Numerical checks on gravitationally driven wavepacket motion: classical
//! drift and Gaussian spreading, the pathologies of a step-function initial
//! state, branch amplitudes and crossed-mode overlaps for two particles, and
//! fixed-energy Green's functions for bound states and tunnelling.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod fit;
pub mod greens;
pub mod grid;
pub mod model;
pub mod propagator;
pub mod quad;
pub mod step_state;

pub use error::{Error, Result};
pub use grid::{make_grid, Geometry, Grid1D, Wavefunction};
pub use model::{to_scaled, PhysicalParams, ScaledUnits};

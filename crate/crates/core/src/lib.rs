//! Pseudo-spectral solvers and diagnostics for one-dimensional periodic
//! collisional quantum hydrodynamics, its Schrödinger–Langevin wave
//! formulation, and the quantum drift-diffusion equation reached in the
//! relaxation-time limit.
//!
//! The layout mirrors the pipeline: [`spectral`] supplies the grid and
//! Fourier operators, [`state`] and [`poisson`] the physical fields,
//! [`sl`], [`qhd`] and [`qdd`] the three time integrators, [`diagnostics`]
//! the functionals and balance-law defects, and [`experiments`] the
//! configurable studies behind the command-line tool.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod poisson;
pub mod qdd;
pub mod qhd;
pub mod sl;
pub mod spectral;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::Model;
pub use spectral::Grid;
pub use state::{DopingProfile, Eos, HydroState, WaveState};
pub use trajectory::Trajectory;

//! Physical parameters shared by the three integrators.

use crate::error::{Error, Result};
use crate::poisson::solve_potential;
use crate::spectral::Grid;
use crate::state::{DopingProfile, Eos};

/// Equation of state, optional Poisson coupling, relaxation time and
/// density floor. `doping: None` switches the electric field off.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub eos: Eos,
    pub doping: Option<DopingProfile>,
    pub tau: f64,
    pub floor: f64,
}

impl Model {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        self.eos.validate()?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.floor >= 0.0) {
            return Err(Error::InvalidConfig(format!("floor must be nonnegative, got {}", self.floor)));
        }
        if let Some(d) = &self.doping {
            if d.c.len() != grid.n() {
                return Err(Error::InvalidConfig("doping profile length does not match grid".into()));
            }
        }
        Ok(())
    }

    /// Electrostatic potential of `rho`, or zero when uncoupled.
    pub fn potential(&self, grid: &Grid, rho: &[f64]) -> Result<Vec<f64>> {
        match &self.doping {
            Some(d) => solve_potential(grid, rho, d),
            None => Ok(vec![0.0; grid.n()]),
        }
    }

    /// `−∂ₓ²(∂ₜV) = ∂ₜρ`, or zero when uncoupled.
    pub fn potential_rate(&self, grid: &Grid, drho_dt: &[f64]) -> Result<Vec<f64>> {
        match &self.doping {
            Some(_) => crate::poisson::solve_zero_mean(grid, drho_dt),
            None => Ok(vec![0.0; grid.n()]),
        }
    }
}

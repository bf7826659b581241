//! Periodic Poisson problem `−∂ₓ²V = ρ − C` in the zero-mean gauge.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Grid;
use crate::state::DopingProfile;

/// Largest `|∫(ρ − C)|` accepted as a compatible source.
pub const COMPAT_TOL: f64 = 1e-8;

/// Zero-mean solution of `−∂ₓ²V = ρ − C`.
pub fn solve_potential(grid: &Grid, rho: &[f64], doping: &DopingProfile) -> Result<Vec<f64>> {
    let source: Vec<f64> = rho.iter().zip(&doping.c).map(|(r, c)| r - c).collect();
    solve_zero_mean(grid, &source)
}

/// Zero-mean solution of `−∂ₓ²V = source`; the source must have zero mean.
pub fn solve_zero_mean(grid: &Grid, source: &[f64]) -> Result<Vec<f64>> {
    let mean = grid.integrate(source);
    if mean.abs() > COMPAT_TOL {
        return Err(Error::IncompatibleSource { mean });
    }
    let mut spec = grid.forward(source);
    for (c, &k) in spec.iter_mut().zip(grid.wavenumbers()) {
        if k == 0.0 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= k * k;
        }
    }
    Ok(grid.inverse_real(&spec))
}

/// Electric energy `½∫(∂ₓV)²`.
pub fn electric_energy(grid: &Grid, potential: &[f64]) -> f64 {
    let dv = grid.deriv(potential, 1);
    0.5 * grid.inner(&dv, &dv)
}

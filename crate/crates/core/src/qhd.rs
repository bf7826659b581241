//! Direct integration of the damped QHD system in `(ρ, v)` form:
//!
//! ```text
//! ∂ₜρ = −∂ₓ(ρv)
//! ∂ₜv = −a ∂ₓ(Q + b v²/2 + f′(ρ) + V) − c v
//! ```
//!
//! with `(a, b, c) = (1/τ², τ², 1/τ²)` in the rescaled frame and
//! `(1, 1, 1/τ)` in physical time, where `Q = −∂ₓ²√ρ/(2√ρ)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::diagnostics::{default_c1, dissipation_rates, energy, DiagnosticsRecord, DissipationAccumulator};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::Grid;
use crate::state::{bohm_potential, HydroState};
use crate::trajectory::{Schedule, Trajectory};

/// Growth of the state norm beyond which a run is declared unstable.
pub const UNSTABLE_GROWTH: f64 = 1e6;

/// Radius of the explicit RK4 stability region, used by the step guard.
const RK4_RADIUS: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical explicit RK4 on the full right side.
    #[default]
    Erk4,
    /// RK4 in integrating-factor form with the damping `−cv` solved exactly.
    ImexDamping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QhdConfig {
    pub dt: f64,
    pub t_final: f64,
    pub model: Model,
    pub rescaled: bool,
    pub integrator: Integrator,
    pub store_every: usize,
    pub c1: Option<f64>,
    /// Fraction of the estimated stability limit used for subcycling.
    pub safety: f64,
}

#[derive(Debug, Clone, Copy)]
struct Coeffs {
    a: f64,
    b: f64,
    c: f64,
}

fn coeffs(tau: f64, rescaled: bool) -> Coeffs {
    if rescaled {
        Coeffs {
            a: 1.0 / (tau * tau),
            b: tau * tau,
            c: 1.0 / (tau * tau),
        }
    } else {
        Coeffs {
            a: 1.0,
            b: 1.0,
            c: 1.0 / tau,
        }
    }
}

/// Right side without the damping term.
fn transport(grid: &Grid, model: &Model, h: &HydroState, k: Coeffs) -> Result<(Vec<f64>, Vec<f64>)> {
    h.check_floor(model.floor)?;
    let flux = grid.dealias(&h.momentum());
    let drho: Vec<f64> = grid.deriv(&flux, 1).into_iter().map(|d| -d).collect();
    let q = bohm_potential(grid, &h.rho);
    let pot = model.potential(grid, &h.rho)?;
    let bracket: Vec<f64> = q
        .iter()
        .zip(&h.rho)
        .zip(&h.v)
        .zip(&pot)
        .map(|(((q, r), v), p)| q + 0.5 * k.b * v * v + model.eos.df(*r) + p)
        .collect();
    let dv: Vec<f64> = grid.deriv(&grid.dealias(&bracket), 1).into_iter().map(|d| -k.a * d).collect();
    Ok((drho, dv))
}

/// `(∂ₜρ, ∂ₜv)` of the damped system.
pub fn qhd_rhs(grid: &Grid, h: &HydroState, model: &Model, rescaled: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = coeffs(model.tau, rescaled);
    let (drho, mut dv) = transport(grid, model, h, k)?;
    for (d, v) in dv.iter_mut().zip(&h.v) {
        *d -= k.c * v;
    }
    Ok((drho, dv))
}

/// Largest stable step for the given state: the RK4 radius divided by a bound on
/// the linearized spectrum at the dealiasing cutoff plus advection and, for
/// `Erk4`, the damping rate.
pub fn stable_step(grid: &Grid, model: &Model, h: &HydroState, rescaled: bool, integrator: Integrator) -> f64 {
    let k = coeffs(model.tau, rescaled);
    let kc = 2.0 * PI * grid.dealias_cutoff() as f64;
    let rmax = h.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rmin = h.min_rho();
    let cs2 = model.eos.dp(rmin).max(model.eos.dp(rmax)).max(0.0);
    let plasma = if model.doping.is_some() { rmax } else { 0.0 };
    let disp = kc.powi(4) / 4.0 + cs2 * kc * kc + plasma;
    let vmax = h.v.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut rate = (k.a * disp).sqrt() + kc * vmax * (1.0 + k.a * k.b);
    if integrator == Integrator::Erk4 {
        rate += k.c;
    }
    RK4_RADIUS / rate
}

fn axpy(y: &HydroState, h: f64, d: &(Vec<f64>, Vec<f64>)) -> HydroState {
    HydroState::new(
        y.rho.iter().zip(&d.0).map(|(a, b)| a + h * b).collect(),
        y.v.iter().zip(&d.1).map(|(a, b)| a + h * b).collect(),
    )
}

fn erk4(grid: &Grid, model: &Model, y: &HydroState, h: f64, rescaled: bool) -> Result<HydroState> {
    let k1 = qhd_rhs(grid, y, model, rescaled)?;
    let k2 = qhd_rhs(grid, &axpy(y, 0.5 * h, &k1), model, rescaled)?;
    let k3 = qhd_rhs(grid, &axpy(y, 0.5 * h, &k2), model, rescaled)?;
    let k4 = qhd_rhs(grid, &axpy(y, h, &k3), model, rescaled)?;
    let comb = |a: &[f64], b: &[f64], c: &[f64], d: &[f64], y: &[f64]| -> Vec<f64> {
        (0..y.len()).map(|j| y[j] + h / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j])).collect()
    };
    Ok(HydroState::new(
        comb(&k1.0, &k2.0, &k3.0, &k4.0, &y.rho),
        comb(&k1.1, &k2.1, &k3.1, &k4.1, &y.v),
    ))
}

/// Lawson RK4 with propagator `E(s) = diag(1, e^{−cs})`.
fn lawson_rk4(grid: &Grid, model: &Model, y: &HydroState, h: f64, rescaled: bool) -> Result<HydroState> {
    let k = coeffs(model.tau, rescaled);
    let e_half = (-0.5 * k.c * h).exp();
    let e_full = (-k.c * h).exp();
    let prop = |s: &HydroState, e: f64| HydroState::new(s.rho.clone(), s.v.iter().map(|v| v * e).collect());
    let prop_d = |d: &(Vec<f64>, Vec<f64>), e: f64| (d.0.clone(), d.1.iter().map(|v| v * e).collect::<Vec<_>>());

    let k1 = transport(grid, model, y, k)?;
    let y2 = prop(&axpy(y, 0.5 * h, &k1), e_half);
    let k2 = transport(grid, model, &y2, k)?;
    let y3 = axpy(&prop(y, e_half), 0.5 * h, &k2);
    let k3 = transport(grid, model, &y3, k)?;
    let y4 = axpy(&prop(y, e_full), h, &prop_d(&k3, e_half));
    let k4 = transport(grid, model, &y4, k)?;

    let base = prop(y, e_full);
    let k1e = prop_d(&k1, e_full);
    let k23: (Vec<f64>, Vec<f64>) = (
        k2.0.iter().zip(&k3.0).map(|(a, b)| a + b).collect(),
        k2.1.iter().zip(&k3.1).map(|(a, b)| (a + b) * e_half).collect(),
    );
    let n = y.rho.len();
    let rho = (0..n)
        .map(|j| base.rho[j] + h / 6.0 * (k1e.0[j] + 2.0 * k23.0[j] + k4.0[j]))
        .collect();
    let v = (0..n)
        .map(|j| base.v[j] + h / 6.0 * (k1e.1[j] + 2.0 * k23.1[j] + k4.1[j]))
        .collect();
    Ok(HydroState::new(rho, v))
}

/// One step of size `h` with the chosen integrator, without subcycling.
pub fn qhd_step(grid: &Grid, model: &Model, y: &HydroState, h: f64, rescaled: bool, integrator: Integrator) -> Result<HydroState> {
    match integrator {
        Integrator::Erk4 => erk4(grid, model, y, h, rescaled),
        Integrator::ImexDamping => lawson_rk4(grid, model, y, h, rescaled),
    }
}

fn state_norm(grid: &Grid, h: &HydroState) -> f64 {
    (grid.inner(&h.rho, &h.rho) + grid.inner(&h.v, &h.v)).sqrt()
}

/// Integrates from `h0`, given in the output frame. Each requested step is
/// split into equal substeps no larger than `safety ×` [`stable_step`] of the
/// initial state.
pub fn qhd_run(grid: &Grid, cfg: &QhdConfig, h0: &HydroState) -> Result<Trajectory> {
    let model = &cfg.model;
    model.validate(grid)?;
    if !(cfg.safety > 0.0) {
        return Err(Error::InvalidConfig(format!("safety factor must be positive, got {}", cfg.safety)));
    }
    h0.check_floor(model.floor)?;
    let tau = model.tau;
    let (sched, dt) = Schedule::new(cfg.t_final, cfg.dt, cfg.store_every)?;
    let limit = cfg.safety * stable_step(grid, model, h0, cfg.rescaled, cfg.integrator);
    let sub = (dt / limit).ceil().max(1.0) as usize;
    let h = dt / sub as f64;

    let pot0 = model.potential(grid, &h0.rho)?;
    let e0 = energy(grid, h0, &model.eos, &pot0, tau, cfg.rescaled).total;
    let c1 = cfg.c1.unwrap_or_else(|| default_c1(e0, h0.mass(grid)));
    let norm0 = state_norm(grid, h0);
    let mut acc = DissipationAccumulator::new(dissipation_rates(grid, h0, tau, cfg.rescaled, model.floor)?);

    let mut traj = Trajectory::new(cfg.rescaled, tau);
    let push = |traj: &mut Trajectory, t: f64, s: &HydroState, totals: [f64; 3]| -> Result<()> {
        let rec = DiagnosticsRecord::evaluate(grid, model, s, t, cfg.rescaled, c1, totals, e0)?;
        traj.times.push(t);
        traj.states.push(s.clone());
        traj.records.push(rec);
        Ok(())
    };
    push(&mut traj, 0.0, h0, acc.totals)?;

    let mut y = h0.clone();
    for step in 1..=sched.steps {
        let t = step as f64 * dt;
        for _ in 0..sub {
            y = qhd_step(grid, model, &y, h, cfg.rescaled, cfg.integrator).map_err(|e| e.at(t))?;
            let growth = state_norm(grid, &y) / norm0;
            if !(growth <= UNSTABLE_GROWTH) {
                return Err(Error::StepUnstable { growth }.at(t));
            }
        }
        y.check_floor(model.floor).map_err(|e| e.at(t))?;
        acc.advance(dt, dissipation_rates(grid, &y, tau, cfg.rescaled, model.floor).map_err(|e| e.at(t))?);
        if sched.stores(step) {
            push(&mut traj, t, &y, acc.totals).map_err(|e| e.at(t))?;
        }
    }
    traj.steps = sched.steps * sub;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DopingProfile, Eos};

    #[test]
    fn constant_matched_state_is_stationary() {
        let g = Grid::new(32).unwrap();
        let model = Model {
            eos: Eos::CenteredPower { n: 1, m0: 1.0 },
            doping: Some(DopingProfile::uniform(&g, 1.0)),
            tau: 0.3,
            floor: 1e-4,
        };
        let (a, b) = qhd_rhs(&g, &HydroState::constant(&g, 1.0), &model, true).unwrap();
        assert!(a.iter().chain(&b).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn uniform_velocity_damps() {
        let g = Grid::new(32).unwrap();
        let tau = 0.4;
        let model = Model {
            eos: Eos::GammaLaw { gamma: 2.0 },
            doping: Some(DopingProfile::uniform(&g, 1.0)),
            tau,
            floor: 1e-4,
        };
        let h = HydroState::new(vec![1.0; 32], vec![0.7; 32]);
        let (_, dv) = qhd_rhs(&g, &h, &model, true).unwrap();
        assert!(dv.iter().all(|d| (d + 0.7 / (tau * tau)).abs() < 1e-12));
    }
}

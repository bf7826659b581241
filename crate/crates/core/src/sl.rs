//! Schrödinger–Langevin integrator for
//! `i∂ₜψ + ½∂ₓ²ψ = f′(|ψ|²)ψ + (S/τ)ψ + Vψ` with the phase `S` carried
//! alongside `ψ`.
//!
//! The solver always works in physical time. Rescaled runs convert their
//! step, horizon and velocities on the way in and out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{default_c1, dissipation_rates, energy, DiagnosticsRecord, DissipationAccumulator};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::Grid;
use crate::state::{hydro_from_wave, rescale_state, wave_lift, HydroState, RescaleDirection, WaveState, WINDING_TOL};
use crate::trajectory::{Schedule, Trajectory};

/// Tolerance of the reference fixed-point mode (max-norm update relative to `max|ψ|`).
pub const PICARD_TOL: f64 = 1e-10;
pub const PICARD_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlMode {
    /// Strang splitting: half potential flow, exact kinetic flow, half potential flow.
    #[default]
    Strang,
    /// Implicit midpoint-in-potential fixed point around the kinetic half steps.
    Picard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlConfig {
    /// Step in the output frame.
    pub dt: f64,
    /// Horizon in the output frame.
    pub t_final: f64,
    pub model: Model,
    pub rescaled: bool,
    pub store_every: usize,
    pub mode: SlMode,
    /// Weight of `I` in the Lyapunov functional; `None` uses [`default_c1`].
    pub c1: Option<f64>,
}

/// `E₀ ≤ ½(√M₀ − δ/√M₀)²`, the smallness condition keeping the density above `δ`.
pub fn energy_smallness_holds(e0: f64, m0: f64, delta: f64) -> bool {
    let b = m0.sqrt() - delta / m0.sqrt();
    b > 0.0 && e0 <= 0.5 * b * b
}

fn velocity(grid: &Grid, psi: &[Complex64]) -> Vec<f64> {
    let d = grid.deriv_complex(psi, 1);
    psi.iter().zip(&d).map(|(p, d)| (p.conj() * d).im / p.norm_sqr()).collect()
}

/// Phase field consistent with `psi`: `S = s_offset + ∫v` (zero-mean primitive).
fn phase_field(grid: &Grid, psi: &[Complex64], s_offset: f64) -> Result<Vec<f64>> {
    let v = velocity(grid, psi);
    let mean = grid.integrate(&v);
    if mean.abs() > WINDING_TOL {
        return Err(Error::NonZeroWinding { mean });
    }
    let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let prim = grid.antideriv_zero_mean_with_tol(&centered, WINDING_TOL)?;
    Ok(prim.into_iter().map(|p| p + s_offset).collect())
}

/// Dealiased `f′(ρ) + V(ρ)`.
fn local_potential(grid: &Grid, model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    let pot = model.potential(grid, rho)?;
    let w: Vec<f64> = rho.iter().zip(&pot).map(|(r, v)| model.eos.df(*r) + v).collect();
    Ok(grid.dealias(&w))
}

/// Exact flow of `i∂ₜψ = (W + S/τ)ψ`, `∂ₜS = −W − S/τ` over `h` with `ρ`, hence `W`, frozen.
fn potential_flow(grid: &Grid, model: &Model, psi: &mut [Complex64], s: &mut [f64], h: f64) -> Result<()> {
    let rho: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
    let w = local_potential(grid, model, &rho)?;
    let tau = model.tau;
    let decay = (-h / tau).exp();
    let gain = -tau * (-(-h / tau).exp_m1());
    for ((p, s), w) in psi.iter_mut().zip(s.iter_mut()).zip(&w) {
        let s_new = decay * *s + gain * w;
        *p *= Complex64::from_polar(1.0, s_new - *s);
        *s = s_new;
    }
    Ok(())
}

fn kinetic_flow(grid: &Grid, psi: &[Complex64], h: f64) -> Vec<Complex64> {
    grid.apply_symbol(psi, |k| Complex64::from_polar(1.0, -0.5 * k * k * h))
}

/// Adds the pointwise phase increment from `old` to `new` onto `s`.
fn track_phase(s: &mut [f64], old: &[Complex64], new: &[Complex64]) {
    for ((s, o), n) in s.iter_mut().zip(old).zip(new) {
        *s += (n * o.conj()).arg();
    }
}

/// Floor and winding checks, then re-projection of `S` onto `mean(S) + ∫v`.
fn finish_step(grid: &Grid, model: &Model, psi: &[Complex64], s: &mut Vec<f64>) -> Result<()> {
    let min = psi.iter().map(|p| p.norm_sqr()).fold(f64::INFINITY, f64::min);
    if !(min >= model.floor) {
        return Err(Error::VacuumBreach { min, floor: model.floor });
    }
    let offset = grid.integrate(s);
    *s = phase_field(grid, psi, offset)?;
    Ok(())
}

fn strang(grid: &Grid, model: &Model, psi: &[Complex64], s: &[f64], dt: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let mut psi = psi.to_vec();
    let mut s = s.to_vec();
    potential_flow(grid, model, &mut psi, &mut s, 0.5 * dt)?;
    let kin = kinetic_flow(grid, &psi, dt);
    track_phase(&mut s, &psi, &kin);
    let mut psi = kin;
    potential_flow(grid, model, &mut psi, &mut s, 0.5 * dt)?;
    finish_step(grid, model, &psi, &mut s)?;
    Ok((psi, s))
}

fn picard(grid: &Grid, model: &Model, psi: &[Complex64], s: &[f64], dt: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let half = kinetic_flow(grid, psi, 0.5 * dt);
    let rho_n: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
    let scale = psi.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let (mut guess, mut s_guess) = strang(grid, model, psi, s, dt)?;
    let mut residual = f64::INFINITY;
    for _ in 0..PICARD_MAX_ITER {
        let rho_mid: Vec<f64> = rho_n.iter().zip(&guess).map(|(a, g)| 0.5 * (a + g.norm_sqr())).collect();
        let w = local_potential(grid, model, &rho_mid)?;
        let rotated: Vec<Complex64> = half
            .iter()
            .zip(&w)
            .zip(s.iter().zip(&s_guess))
            .map(|((p, w), (a, b))| p * Complex64::from_polar(1.0, -dt * (w + 0.5 * (a + b) / model.tau)))
            .collect();
        let next = kinetic_flow(grid, &rotated, 0.5 * dt);
        residual = next.iter().zip(&guess).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        let mut s_next = s.to_vec();
        track_phase(&mut s_next, psi, &next);
        finish_step(grid, model, &next, &mut s_next)?;
        guess = next;
        s_guess = s_next;
        if residual <= PICARD_TOL {
            return Ok((guess, s_guess));
        }
    }
    Err(Error::NoConvergence {
        iterations: PICARD_MAX_ITER,
        residual,
    })
}

fn step_fields(
    grid: &Grid,
    model: &Model,
    mode: SlMode,
    psi: &[Complex64],
    s: &[f64],
    dt: f64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    match mode {
        SlMode::Strang => strang(grid, model, psi, s, dt),
        SlMode::Picard => picard(grid, model, psi, s, dt),
    }
}

/// Advances `w` by the physical-time step `dt`. The returned offset is the
/// mean of the updated phase.
pub fn sl_step(grid: &Grid, w: &WaveState, dt: f64, model: &Model, mode: SlMode) -> Result<WaveState> {
    w.check_floor(model.floor)?;
    let s = phase_field(grid, &w.psi, w.s_offset)?;
    let (psi, s) = step_fields(grid, model, mode, &w.psi, &s, dt)?;
    Ok(WaveState::new(psi, grid.integrate(&s)))
}

fn to_output(h: HydroState, tau: f64, rescaled: bool) -> HydroState {
    if rescaled {
        rescale_state(&h, tau, RescaleDirection::Forward).0
    } else {
        h
    }
}

/// Runs from a hydrodynamic state given in the output frame, lifted with phase offset `s_star`.
pub fn sl_run_hydro(grid: &Grid, cfg: &SlConfig, h0: &HydroState, s_star: f64) -> Result<Trajectory> {
    let physical = if cfg.rescaled {
        rescale_state(h0, cfg.model.tau, RescaleDirection::Inverse).0
    } else {
        h0.clone()
    };
    let w0 = wave_lift(grid, &physical, s_star, cfg.model.floor)?;
    sl_run(grid, cfg, &w0)
}

pub fn sl_run(grid: &Grid, cfg: &SlConfig, init: &WaveState) -> Result<Trajectory> {
    let model = &cfg.model;
    model.validate(grid)?;
    let tau = model.tau;
    let (sched, dt_out) = Schedule::new(cfg.t_final, cfg.dt, cfg.store_every)?;
    let dt = if cfg.rescaled { dt_out / tau } else { dt_out };

    init.check_floor(model.floor)?;
    let mut psi = init.psi.clone();
    let mut s = phase_field(grid, &psi, init.s_offset)?;

    let h0 = to_output(hydro_from_wave(grid, init, model.floor)?, tau, cfg.rescaled);
    let pot0 = model.potential(grid, &h0.rho)?;
    let e0 = energy(grid, &h0, &model.eos, &pot0, tau, cfg.rescaled).total;
    let c1 = cfg.c1.unwrap_or_else(|| default_c1(e0, h0.mass(grid)));
    let mut acc = DissipationAccumulator::new(dissipation_rates(grid, &h0, tau, cfg.rescaled, model.floor)?);

    let mut traj = Trajectory::new(cfg.rescaled, tau);
    let store = |traj: &mut Trajectory, t: f64, h: HydroState, w: WaveState, totals: [f64; 3]| -> Result<()> {
        let rec = DiagnosticsRecord::evaluate(grid, model, &h, t, cfg.rescaled, c1, totals, e0)?;
        traj.times.push(t);
        traj.states.push(h);
        traj.waves.push(w);
        traj.records.push(rec);
        Ok(())
    };
    store(&mut traj, 0.0, h0, WaveState::new(psi.clone(), grid.integrate(&s)), acc.totals)?;

    for step in 1..=sched.steps {
        let t = step as f64 * dt_out;
        let (p, sn) = step_fields(grid, model, cfg.mode, &psi, &s, dt).map_err(|e| e.at(t))?;
        psi = p;
        s = sn;
        let w = WaveState::new(psi.clone(), grid.integrate(&s));
        let h = to_output(hydro_from_wave(grid, &w, model.floor).map_err(|e| e.at(t))?, tau, cfg.rescaled);
        acc.advance(dt_out, dissipation_rates(grid, &h, tau, cfg.rescaled, model.floor).map_err(|e| e.at(t))?);
        if sched.stores(step) {
            store(&mut traj, t, h, w, acc.totals).map_err(|e| e.at(t))?;
        }
    }
    traj.steps = sched.steps;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DopingProfile, Eos};
    use std::f64::consts::PI;

    fn matched_model(g: &Grid, m0: f64, tau: f64) -> Model {
        Model {
            eos: Eos::CenteredPower { n: 1, m0 },
            doping: Some(DopingProfile::uniform(g, m0)),
            tau,
            floor: 1e-4 * m0,
        }
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let g = Grid::new(32).unwrap();
        let m0: f64 = 1.3;
        let model = matched_model(&g, m0, 0.7);
        let w = WaveState::new(vec![Complex64::new(m0.sqrt(), 0.0); 32], 0.0);
        for mode in [SlMode::Strang, SlMode::Picard] {
            let next = sl_step(&g, &w, 1e-3, &model, mode).unwrap();
            let err = next.psi.iter().zip(&w.psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn mean_phase_decays_exponentially() {
        let g = Grid::new(32).unwrap();
        let m0: f64 = 1.0;
        let tau = 0.5;
        let model = matched_model(&g, m0, tau);
        let mut w = WaveState::new(vec![Complex64::from_polar(m0.sqrt(), 1.0); 32], 1.0);
        let dt = 0.01;
        for k in 1..=50 {
            w = sl_step(&g, &w, dt, &model, SlMode::Strang).unwrap();
            let t = k as f64 * dt;
            assert!((w.s_offset - (-t / tau).exp()).abs() < 1e-12);
            assert!(w.psi.iter().all(|p| (p.norm() - 1.0).abs() < 1e-13));
        }
    }

    #[test]
    fn smallness_condition() {
        assert!(energy_smallness_holds(0.1, 1.0, 1e-4));
        assert!(!energy_smallness_holds(0.6, 1.0, 1e-4));
    }

    #[test]
    fn winding_state_is_rejected() {
        let g = Grid::new(32).unwrap();
        let model = matched_model(&g, 1.0, 1.0);
        let w = WaveState::new(g.sample_complex(|x| Complex64::from_polar(1.0, 2.0 * PI * x)), 0.0);
        assert!(matches!(sl_step(&g, &w, 1e-3, &model, SlMode::Strang), Err(Error::NonZeroWinding { .. })));
    }
}

//! Quantum drift-diffusion equation
//! `∂ₜρ + ¼∂ₓ⁴ρ = ∂ₓ²[(∂ₓ√ρ)²] + ∂ₓ²p(ρ) + ∂ₓ(ρ∂ₓV)`,
//! its constitutive current and a weak-form residual.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{entropy, h2_identity};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::Grid;
use crate::state::{check_density_floor, quantum_stress_enthalpy, HydroState};

#[derive(Debug, Clone, PartialEq)]
pub struct QddConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Only the equation of state, coupling and floor are used; `tau` is ignored.
    pub model: Model,
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate in the damped fixed-point update.
    pub damping: f64,
    pub store_every: usize,
}

impl QddConfig {
    pub fn new(dt: f64, t_final: f64, model: Model) -> Self {
        Self {
            dt,
            t_final,
            model,
            tol: 1e-10,
            max_iter: 200,
            damping: 0.5,
            store_every: 1,
        }
    }
}

/// Explicitly treated part `∂ₓ²[(∂ₓ√ρ)²] + ∂ₓ²p(ρ) + ∂ₓ(ρ∂ₓV)`.
fn nonlinear_part(grid: &Grid, model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let dsq = grid.deriv(&sq, 1);
    let inner: Vec<f64> = dsq.iter().zip(rho).map(|(d, r)| d * d + model.eos.p(*r)).collect();
    let mut out = grid.deriv(&grid.dealias(&inner), 2);
    if model.doping.is_some() {
        let pot = model.potential(grid, rho)?;
        let dv = grid.deriv(&pot, 1);
        let drift: Vec<f64> = rho.iter().zip(&dv).map(|(r, d)| r * d).collect();
        let ddrift = grid.deriv(&grid.dealias(&drift), 1);
        out.iter_mut().zip(&ddrift).for_each(|(o, d)| *o += d);
    }
    Ok(out)
}

/// `(I + dt·¼∂ₓ⁴)⁻¹ (ρ + dt·rhs)`.
fn implicit_solve(grid: &Grid, rho: &[f64], rhs: &[f64], dt: f64) -> Vec<f64> {
    let src: Vec<f64> = rho.iter().zip(rhs).map(|(r, f)| r + dt * f).collect();
    grid.apply_real_symbol(&src, |k| 1.0 / (1.0 + 0.25 * dt * k.powi(4)))
}

/// Backward-Euler step: damped fixed-point iteration on `ρ*` starting from
/// `guess` (or `rho`), until the max-norm update relative to `max ρ` is below `tol`.
pub fn qdd_step(grid: &Grid, cfg: &QddConfig, rho: &[f64], guess: Option<&[f64]>, dt: f64) -> Result<Vec<f64>> {
    Ok(solve_step(grid, cfg, rho, guess, dt)?.0)
}

fn solve_step(grid: &Grid, cfg: &QddConfig, rho: &[f64], guess: Option<&[f64]>, dt: f64) -> Result<(Vec<f64>, usize)> {
    let model = &cfg.model;
    check_density_floor(rho, model.floor)?;
    let scale = rho.iter().copied().fold(0.0, f64::max);
    let mut star: Vec<f64> = guess.unwrap_or(rho).to_vec();
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        let rhs = nonlinear_part(grid, model, &star)?;
        let next = implicit_solve(grid, rho, &rhs, dt);
        residual = next.iter().zip(&star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        if residual <= cfg.tol {
            check_density_floor(&next, model.floor)?;
            return Ok((next, iter));
        }
        let w = cfg.damping;
        star = star.iter().zip(&next).map(|(s, n)| (1.0 - w) * s + w * n).collect();
        if star.iter().any(|s| !(*s > 0.0)) {
            let min = star.iter().copied().fold(f64::INFINITY, f64::min);
            return Err(Error::VacuumBreach { min, floor: model.floor });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        residual,
    })
}

/// Per-store entropy diagnostics of a drift-diffusion trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QddRecord {
    pub t: f64,
    pub mass: f64,
    pub h: f64,
    /// `∫(∂ₓ²√ρ)²`
    pub sqrt_h2: f64,
    /// `∫(∂ₓρ^{1/4})⁴`
    pub quarter_pow4: f64,
    /// Time integrals of the two dissipation densities.
    pub dissip_sqrt_h2: f64,
    pub dissip_quarter_pow4: f64,
    /// `H(ρ₀) − H(t) − dissip_sqrt_h2 − dissip_quarter_pow4`; nonnegative
    /// when the cumulative dissipation inequality holds.
    pub entropy_inequality_slack: f64,
}

pub const QDD_CSV_HEADER: &str = "t,mass,H,dissip_sqrt_H2,dissip_quarter_pow4,entropy_inequality_slack";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QddTrajectory {
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    pub records: Vec<QddRecord>,
    pub steps: usize,
    /// Largest number of fixed-point iterations used by any step.
    pub max_iterations: usize,
}

impl QddTrajectory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(QDD_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.t, r.mass, r.h, r.dissip_sqrt_h2, r.dissip_quarter_pow4, r.entropy_inequality_slack
            ));
        }
        out
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        self.records.iter().map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max)
    }

    /// Density at time `t` by linear interpolation between stored states.
    pub fn density_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|s| *s < t);
        if k == 0 {
            return self.densities[0].clone();
        }
        if k >= self.times.len() {
            return self.densities.last().unwrap().clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        if (t1 - t).abs() <= 1e-12 * t1.abs().max(1.0) {
            return self.densities[k].clone();
        }
        let w = (t - t0) / (t1 - t0);
        self.densities[k - 1]
            .iter()
            .zip(&self.densities[k])
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }
}

fn dissipation_pair(grid: &Grid, rho: &[f64]) -> Result<(f64, f64)> {
    Ok(h2_identity(grid, rho)?.1)
}

/// Backward-Euler integration from `rho0`. The fixed point of each step
/// starts from the linear extrapolation `2ρₙ − ρₙ₋₁`.
pub fn qdd_run(grid: &Grid, cfg: &QddConfig, rho0: &[f64]) -> Result<QddTrajectory> {
    cfg.model.eos.validate()?;
    check_density_floor(rho0, cfg.model.floor)?;
    let (sched, dt) = crate::trajectory::Schedule::new(cfg.t_final, cfg.dt, cfg.store_every)?;
    let h0 = entropy(grid, rho0)?;
    let (mut a_prev, mut b_prev) = dissipation_pair(grid, rho0)?;
    let (mut da, mut db) = (0.0, 0.0);
    let record = |t: f64, rho: &[f64], a: f64, b: f64, da: f64, db: f64| -> Result<QddRecord> {
        let h = entropy(grid, rho)?;
        Ok(QddRecord {
            t,
            mass: grid.integrate(rho),
            h,
            sqrt_h2: a,
            quarter_pow4: b,
            dissip_sqrt_h2: da,
            dissip_quarter_pow4: db,
            entropy_inequality_slack: h0 - h - da - db,
        })
    };
    let mut traj = QddTrajectory {
        times: vec![0.0],
        densities: vec![rho0.to_vec()],
        records: vec![record(0.0, rho0, a_prev, b_prev, 0.0, 0.0)?],
        steps: sched.steps,
        max_iterations: 0,
    };
    let mut prev: Option<Vec<f64>> = None;
    let mut rho = rho0.to_vec();
    for step in 1..=sched.steps {
        let t = step as f64 * dt;
        let guess: Option<Vec<f64>> = prev
            .as_ref()
            .map(|p| rho.iter().zip(p).map(|(a, b)| 2.0 * a - b).collect::<Vec<f64>>())
            .filter(|g| g.iter().all(|x| *x > 0.0));
        let (next, iters) = solve_step(grid, cfg, &rho, guess.as_deref(), dt).map_err(|e| e.at(t))?;
        traj.max_iterations = traj.max_iterations.max(iters);
        let (a, b) = dissipation_pair(grid, &next).map_err(|e| e.at(t))?;
        da += 0.5 * dt * (a + a_prev);
        db += 0.5 * dt * (b + b_prev);
        a_prev = a;
        b_prev = b;
        prev = Some(std::mem::replace(&mut rho, next));
        if sched.stores(step) {
            traj.times.push(t);
            traj.densities.push(rho.clone());
            traj.records.push(record(t, &rho, a, b, da, db).map_err(|e| e.at(t))?);
        }
    }
    Ok(traj)
}

/// `J̄ = ½ρ∂ₓ(∂ₓ²√ρ/√ρ) − ∂ₓp(ρ) − ρ∂ₓV̄`.
pub fn constitutive_current(grid: &Grid, model: &Model, rho: &[f64]) -> Result<Vec<f64>> {
    let mut j = quantum_stress_enthalpy(grid, rho, model.floor)?;
    let p: Vec<f64> = rho.iter().map(|r| model.eos.p(*r)).collect();
    let dp = grid.deriv(&p, 1);
    let pot = model.potential(grid, rho)?;
    let dv = grid.deriv(&pot, 1);
    for (((j, dp), r), dv) in j.iter_mut().zip(&dp).zip(rho).zip(&dv) {
        *j -= dp + r * dv;
    }
    Ok(j)
}

/// Hydrodynamic state whose momentum is the constitutive current of `rho`.
pub fn well_prepared_state(grid: &Grid, model: &Model, rho: &[f64]) -> Result<HydroState> {
    let j = constitutive_current(grid, model, rho)?;
    Ok(HydroState::new(rho.to_vec(), j.iter().zip(rho).map(|(j, r)| j / r).collect()))
}

/// Smooth test function `η(t, x)` for the weak formulation.
pub trait TestFunction {
    fn eta(&self, t: f64, x: f64) -> f64;
    fn eta_t(&self, t: f64, x: f64) -> f64;
}

/// `η = φ(t)·χ(x)` with `φ(t) = cos²(πt/(2T))`, which vanishes at `t = T`.
#[derive(Debug, Clone, Copy)]
pub struct SeparableTest<F: Fn(f64) -> f64> {
    pub horizon: f64,
    pub space: F,
}

impl<F: Fn(f64) -> f64> TestFunction for SeparableTest<F> {
    fn eta(&self, t: f64, x: f64) -> f64 {
        let c = (std::f64::consts::FRAC_PI_2 * t / self.horizon).cos();
        c * c * (self.space)(x)
    }

    fn eta_t(&self, t: f64, x: f64) -> f64 {
        let th = std::f64::consts::FRAC_PI_2 * t / self.horizon;
        -std::f64::consts::FRAC_PI_2 / self.horizon * (2.0 * th).sin() * (self.space)(x)
    }
}

/// `∫₀ᵀ∫ ρ∂ₜη + [(∂ₓ√ρ)² + p(ρ)]∂ₓ²η − ρ∂ₓV∂ₓη − ¼ρ∂ₓ⁴η + ∫ρ₀η(0)`,
/// with the time integral by the trapezoidal rule over stored states.
pub fn weak_form_residual(grid: &Grid, model: &Model, traj: &QddTrajectory, eta: &dyn TestFunction) -> Result<f64> {
    let xs = grid.points();
    let mut vals = Vec::with_capacity(traj.times.len());
    for (t, rho) in traj.times.iter().zip(&traj.densities) {
        let e: Vec<f64> = xs.iter().map(|x| eta.eta(*t, *x)).collect();
        let et: Vec<f64> = xs.iter().map(|x| eta.eta_t(*t, *x)).collect();
        let spec = grid.forward(&e);
        let d = |order: u32| -> Vec<f64> {
            let s: Vec<Complex64> = spec
                .iter()
                .zip(grid.wavenumbers())
                .map(|(c, k)| c * Complex64::new(0.0, *k).powu(order))
                .collect();
            grid.inverse_real(&s)
        };
        let (e1, e2, e4) = (d(1), d(2), d(4));
        let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
        let dsq = grid.deriv(&sq, 1);
        let pot = model.potential(grid, rho)?;
        let dv = grid.deriv(&pot, 1);
        let dens: Vec<f64> = (0..rho.len())
            .map(|j| {
                rho[j] * et[j] + (dsq[j] * dsq[j] + model.eos.p(rho[j])) * e2[j] - rho[j] * dv[j] * e1[j]
                    - 0.25 * rho[j] * e4[j]
            })
            .collect();
        vals.push(grid.integrate(&dens));
    }
    let mut total = 0.0;
    for k in 1..vals.len() {
        total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (vals[k] + vals[k - 1]);
    }
    let e0: Vec<f64> = xs.iter().map(|x| eta.eta(0.0, *x)).collect();
    Ok(total + grid.inner(&traj.densities[0], &e0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DopingProfile, Eos};
    use std::f64::consts::PI;

    fn dlss(floor: f64) -> Model {
        Model {
            eos: Eos::Zero,
            doping: None,
            tau: 1.0,
            floor,
        }
    }

    #[test]
    fn matched_constant_is_unchanged() {
        let g = Grid::new(32).unwrap();
        let model = Model {
            eos: Eos::CenteredPower { n: 1, m0: 1.2 },
            doping: Some(DopingProfile::uniform(&g, 1.2)),
            tau: 1.0,
            floor: 1e-4,
        };
        let cfg = QddConfig::new(1e-3, 1e-3, model);
        let out = qdd_step(&g, &cfg, &vec![1.2; 32], None, 1e-3).unwrap();
        assert!(out.iter().all(|r| (r - 1.2).abs() < 1e-14));
    }

    #[test]
    fn small_mode_decays_at_linear_rate() {
        let g = Grid::new(64).unwrap();
        let eps = 1e-4;
        let dt = 1e-4;
        let cfg = QddConfig::new(dt, dt, dlss(1e-4));
        let rho = g.sample(|x| 1.0 + eps * (2.0 * PI * x).cos());
        let out = qdd_step(&g, &cfg, &rho, None, dt).unwrap();
        let amp = 2.0 * g.inner(&out.iter().map(|r| r - 1.0).collect::<Vec<_>>(), &g.sample(|x| (2.0 * PI * x).cos()));
        let z = 4.0 * PI.powi(4) * dt;
        // Backward Euler reproduces 1/(1 + z); the continuous factor e^{−z} differs at O(z²).
        assert!(((amp / eps) - 1.0 / (1.0 + z)).abs() < 1e-6, "{amp}");
        assert!(((amp / eps) - (-z).exp()).abs() < z * z);
    }

    #[test]
    fn current_reduces_to_quantum_stress() {
        let g = Grid::new(64).unwrap();
        let rho = g.sample(|x| 1.0 + 0.2 * (2.0 * PI * x).sin());
        let j = constitutive_current(&g, &dlss(1e-4), &rho).unwrap();
        let q = quantum_stress_enthalpy(&g, &rho, 1e-4).unwrap();
        assert!(j.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-9));
        let model = Model {
            eos: Eos::GammaLaw { gamma: 2.0 },
            doping: Some(DopingProfile::uniform(&g, 1.0)),
            tau: 1.0,
            floor: 1e-4,
        };
        assert!(constitutive_current(&g, &model, &vec![1.0; 64]).unwrap().iter().all(|j| j.abs() < 1e-14));
    }

    #[test]
    fn weak_residual_trivial_cases() {
        let g = Grid::new(32).unwrap();
        let cfg = QddConfig {
            store_every: 1,
            ..QddConfig::new(1e-3, 0.05, dlss(1e-4))
        };
        let traj = qdd_run(&g, &cfg, &g.sample(|x| 1.0 + 0.2 * (2.0 * PI * x).cos())).unwrap();
        let zero = SeparableTest { horizon: 0.05, space: |_| 0.0 };
        assert_eq!(weak_form_residual(&g, &cfg.model, &traj, &zero).unwrap(), 0.0);
        let flat = SeparableTest { horizon: 0.05, space: |_| 1.0 };
        // Only the trapezoidal error in time remains, of size T·dt²·max|φ‴|/12.
        assert!(weak_form_residual(&g, &cfg.model, &traj, &flat).unwrap().abs() < 5e-4);
    }
}

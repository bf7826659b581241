//! Functionals evaluated on states and the balance-law defects evaluated on
//! trajectories.
//!
//! Quantities carry a frame: unrescaled fields `(ρ, v)` in physical time, or
//! rescaled fields `(ρ, v_τ)` in diffusive time `t′ = τt` with `v = τ v_τ`.
//! The energy and the higher-order functional take the same values in both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::Grid;
use crate::state::{
    chemical_potential, check_density_floor, rescale_state, sigma_field, Eos, HydroState, RescaleDirection,
};
use crate::trajectory::Trajectory;

/// Largest mass difference tolerated by [`relative_entropy`].
pub const MASS_MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub quantum: f64,
    pub internal: f64,
    pub electric: f64,
    pub total: f64,
}

/// Kinetic (`½ρv²`, or `½τ²ρv_τ²` when rescaled), quantum `½(∂ₓ√ρ)²`,
/// internal `f(ρ)` and electric `½(∂ₓV)²` energies.
pub fn energy(grid: &Grid, h: &HydroState, eos: &Eos, potential: &[f64], tau: f64, rescaled: bool) -> EnergyParts {
    let w = if rescaled { tau * tau } else { 1.0 };
    let kin: Vec<f64> = h.rho.iter().zip(&h.v).map(|(r, v)| 0.5 * w * r * v * v).collect();
    let sq: Vec<f64> = h.rho.iter().map(|r| r.sqrt()).collect();
    let dsq = grid.deriv(&sq, 1);
    let fr: Vec<f64> = h.rho.iter().map(|r| eos.f(*r)).collect();
    let dv = grid.deriv(potential, 1);
    let kinetic = grid.integrate(&kin);
    let quantum = 0.5 * grid.inner(&dsq, &dsq);
    let internal = grid.integrate(&fr);
    let electric = 0.5 * grid.inner(&dv, &dv);
    EnergyParts {
        kinetic,
        quantum,
        internal,
        electric,
        total: kinetic + quantum + internal + electric,
    }
}

/// `I = ∫ ½ρ(μ² + σ²)`, or `I_τ = ∫ ½τ²ρ(μ_τ² + σ_τ²)` when rescaled.
pub fn gcp_functional(
    grid: &Grid,
    h: &HydroState,
    eos: &Eos,
    potential: &[f64],
    tau: f64,
    rescaled: bool,
    floor: f64,
) -> Result<f64> {
    let mu = chemical_potential(grid, h, eos, potential, tau, rescaled, floor)?;
    let s = sigma_field(grid, h, floor)?;
    let w = if rescaled { tau * tau } else { 1.0 };
    let dens: Vec<f64> = h
        .rho
        .iter()
        .zip(&mu)
        .zip(&s)
        .map(|((r, m), s)| 0.5 * w * r * (m * m + s * s))
        .collect();
    Ok(grid.integrate(&dens))
}

/// Physical entropy `H(ρ) = ∫ ρ log(ρ/M₀)` with `M₀ = ∫ρ`.
pub fn entropy(grid: &Grid, rho: &[f64]) -> Result<f64> {
    check_positive(rho)?;
    let m0 = grid.integrate(rho);
    // Integrand `ρ log(ρ/M₀) − ρ + M₀` has the same integral and no cancellation.
    let dens: Vec<f64> = rho
        .iter()
        .map(|r| {
            let u = (r - m0) / m0;
            m0 * ((1.0 + u) * u.ln_1p() - u)
        })
        .collect();
    Ok(grid.integrate(&dens))
}

fn check_positive(rho: &[f64]) -> Result<()> {
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::VacuumBreach { min, floor: 0.0 });
    }
    Ok(())
}

/// Bregman divergence of `g(s) = s log(s/M₀)`:
/// `H(ρ|ρ̄) = ∫ g(ρ) − g(ρ̄) − g′(ρ̄)(ρ − ρ̄) = ∫ ρ log(ρ/ρ̄) − ρ + ρ̄`.
pub fn relative_entropy(grid: &Grid, rho: &[f64], rho_bar: &[f64], floor: f64) -> Result<f64> {
    check_density_floor(rho, floor)?;
    check_density_floor(rho_bar, floor)?;
    check_positive(rho)?;
    check_positive(rho_bar)?;
    let (m, mb) = (grid.integrate(rho), grid.integrate(rho_bar));
    if (m - mb).abs() > MASS_MATCH_TOL {
        return Err(Error::MassMismatch { first: m, second: mb });
    }
    let dens: Vec<f64> = rho.iter().zip(rho_bar).map(|(r, b)| r * (r / b).ln() - r + b).collect();
    Ok(grid.integrate(&dens))
}

/// `F_τ = H + E_τ + c₁ I_τ` evaluated on a rescaled-frame state.
pub fn lyapunov_f(grid: &Grid, h: &HydroState, eos: &Eos, potential: &[f64], tau: f64, c1: f64, floor: f64) -> Result<f64> {
    let hh = entropy(grid, &h.rho)?;
    let e = energy(grid, h, eos, potential, tau, true).total;
    let i = gcp_functional(grid, h, eos, potential, tau, true, floor)?;
    Ok(hh + e + c1 * i)
}

/// Default `c₁ = 10⁻²/(1 + E₀ + M₀)`.
pub fn default_c1(e0: f64, m0: f64) -> f64 {
    1e-2 / (1.0 + e0 + m0)
}

/// Both sides of `∫ρ(∂ₓ² log √ρ)² = ∫(∂ₓ²√ρ)² + (16/3)∫(∂ₓρ^{1/4})⁴`,
/// returned as `(left, (∫(∂ₓ²√ρ)², ∫(∂ₓρ^{1/4})⁴))`.
pub fn h2_identity(grid: &Grid, rho: &[f64]) -> Result<(f64, (f64, f64))> {
    check_positive(rho)?;
    let lg: Vec<f64> = rho.iter().map(|r| 0.5 * r.ln()).collect();
    let d2lg = grid.deriv(&lg, 2);
    let left: Vec<f64> = rho.iter().zip(&d2lg).map(|(r, d)| r * d * d).collect();
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let d2sq = grid.deriv(&sq, 2);
    let q4: Vec<f64> = rho.iter().map(|r| r.powf(0.25)).collect();
    let dq4 = grid.deriv(&q4, 1);
    let a = grid.inner(&d2sq, &d2sq);
    let b = grid.integrate(&dq4.iter().map(|d| d.powi(4)).collect::<Vec<_>>());
    Ok((grid.integrate(&left), (a, b)))
}

/// `(H(ρ), (1/2π²)∫(∂ₓ√ρ)²)`; the logarithmic Sobolev inequality states the
/// first does not exceed the second.
pub fn log_sobolev(grid: &Grid, rho: &[f64]) -> Result<(f64, f64)> {
    let h = entropy(grid, rho)?;
    let sq: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let d = grid.deriv(&sq, 1);
    let bound = grid.inner(&d, &d) / (2.0 * std::f64::consts::PI.powi(2));
    Ok((h, bound))
}

/// Instantaneous dissipation densities integrated in space, in the frame of
/// `h`: `[w∫ρv², w∫ρσ², ∫ρv⁴]` where `w = 1/τ` unrescaled and `1` rescaled.
pub fn dissipation_rates(grid: &Grid, h: &HydroState, tau: f64, rescaled: bool, floor: f64) -> Result<[f64; 3]> {
    let s = sigma_field(grid, h, floor)?;
    let w = if rescaled { 1.0 } else { 1.0 / tau };
    let v2: Vec<f64> = h.rho.iter().zip(&h.v).map(|(r, v)| r * v * v).collect();
    let s2: Vec<f64> = h.rho.iter().zip(&s).map(|(r, s)| r * s * s).collect();
    let v4: Vec<f64> = h.rho.iter().zip(&h.v).map(|(r, v)| r * v.powi(4)).collect();
    Ok([w * grid.integrate(&v2), w * grid.integrate(&s2), grid.integrate(&v4)])
}

/// Trapezoidal time integral of the [`dissipation_rates`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DissipationAccumulator {
    pub totals: [f64; 3],
    last: Option<[f64; 3]>,
}

impl DissipationAccumulator {
    pub fn new(initial: [f64; 3]) -> Self {
        Self {
            totals: [0.0; 3],
            last: Some(initial),
        }
    }

    pub fn advance(&mut self, dt: f64, rates: [f64; 3]) {
        if let Some(prev) = self.last {
            for k in 0..3 {
                self.totals[k] += 0.5 * dt * (prev[k] + rates[k]);
            }
        }
        self.last = Some(rates);
    }
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: EnergyParts,
    pub i: f64,
    pub h: f64,
    pub f_tau: f64,
    pub dissip_v2: f64,
    pub dissip_sigma2: f64,
    pub dissip_v4: f64,
    pub energy_defect: f64,
    pub v_winding: f64,
    /// Filled in by [`balance_defects`]; `NaN` at the ends of a trajectory.
    pub i_defect: f64,
    pub entropy_slack: f64,
}

pub const CSV_HEADER: &str = "t,mass,E_total,E_kinetic,E_quantum,E_internal,E_electric,I,H,F_tau,dissip_v2,dissip_sigma2,dissip_v4,energy_defect,v_winding,I_defect,entropy_slack";

impl DiagnosticsRecord {
    /// Evaluates every functional on `h` given in the trajectory's frame.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        grid: &Grid,
        model: &Model,
        h: &HydroState,
        t: f64,
        rescaled: bool,
        c1: f64,
        dissipation: [f64; 3],
        e0: f64,
    ) -> Result<Self> {
        let pot = model.potential(grid, &h.rho)?;
        let en = energy(grid, h, &model.eos, &pot, model.tau, rescaled);
        let i = gcp_functional(grid, h, &model.eos, &pot, model.tau, rescaled, model.floor)?;
        let hh = entropy(grid, &h.rho)?;
        let (i_tau, e) = (i, en.total);
        Ok(Self {
            t,
            mass: grid.integrate(&h.rho),
            energy: en,
            i,
            h: hh,
            f_tau: hh + e + c1 * i_tau,
            dissip_v2: dissipation[0],
            dissip_sigma2: dissipation[1],
            dissip_v4: dissipation[2],
            energy_defect: e + dissipation[0] - e0,
            v_winding: grid.integrate(&h.v),
            i_defect: f64::NAN,
            entropy_slack: f64::NAN,
        })
    }

    pub fn csv_row(&self) -> String {
        let vals = [
            self.t,
            self.mass,
            self.energy.total,
            self.energy.kinetic,
            self.energy.quantum,
            self.energy.internal,
            self.energy.electric,
            self.i,
            self.h,
            self.f_tau,
            self.dissip_v2,
            self.dissip_sigma2,
            self.dissip_v4,
            self.energy_defect,
            self.v_winding,
            self.i_defect,
            self.entropy_slack,
        ];
        vals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

/// Defect time series of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defects {
    pub times: Vec<f64>,
    /// `E(t) + dissipation − E₀` at every stored time.
    pub energy: Vec<f64>,
    /// Centered `dI/dt` minus the right side of the `I` identity, at interior
    /// stored times.
    pub i_identity: Vec<f64>,
    /// Right side minus left side of the entropy inequality (rescaled frame),
    /// at interior stored times; negative values flag an exceeded bound.
    pub entropy_slack: Vec<f64>,
    /// Interior stored times, in the trajectory's own frame.
    pub interior_times: Vec<f64>,
}

impl Defects {
    pub fn max_abs_energy(&self) -> f64 {
        max_abs(&self.energy)
    }

    pub fn max_abs_i_identity(&self) -> f64 {
        max_abs(&self.i_identity)
    }

    pub fn min_entropy_slack(&self) -> f64 {
        self.entropy_slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Second-order derivative at `t1` from three possibly unequally spaced samples.
fn centered_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h0 = t[1] - t[0];
    let h1 = t[2] - t[1];
    (h0 * h0 * f[2] - h1 * h1 * f[0] + (h1 * h1 - h0 * h0) * f[1]) / (h0 * h1 * (h0 + h1))
}

/// Space integrals entering the right side of the `I` identity, evaluated in
/// the frame of `h`.
fn i_identity_rhs(grid: &Grid, model: &Model, h: &HydroState, rescaled: bool) -> Result<(f64, f64)> {
    let tau = model.tau;
    let pot = model.potential(grid, &h.rho)?;
    let mu = chemical_potential(grid, h, &model.eos, &pot, tau, rescaled, model.floor)?;
    let s = sigma_field(grid, h, model.floor)?;
    let djdx = grid.deriv(&h.momentum(), 1);
    let drho: Vec<f64> = djdx.iter().map(|d| -d).collect();
    let dp: Vec<f64> = h.rho.iter().zip(&drho).map(|(r, d)| model.eos.dp(*r) * d).collect();
    let dv = model.potential_rate(grid, &drho)?;
    let a = grid.inner(&mu, &dp);
    let b = grid.integrate(&h.rho.iter().zip(&mu).zip(&dv).map(|((r, m), d)| r * m * d).collect::<Vec<_>>());
    let c = grid.integrate(&h.rho.iter().zip(&mu).zip(&h.v).map(|((r, m), v)| r * v * v * m).collect::<Vec<_>>());
    let s2 = grid.integrate(&h.rho.iter().zip(&s).map(|(r, s)| r * s * s).collect::<Vec<_>>());
    // Unrescaled: dI/dt + s2/τ = a + b − c/τ.  Rescaled: dI/dt + s2 = τ(a + b − c).
    if rescaled {
        Ok((s2, tau * (a + b - c)))
    } else {
        Ok((s2 / tau, a + b - c / tau))
    }
}

/// Pieces of the entropy inequality in the rescaled frame: the bracketed
/// quantity under the time derivative, the dissipative left-side terms and
/// the right side.
fn entropy_terms(grid: &Grid, model: &Model, h: &HydroState) -> Result<(f64, f64, f64)> {
    let tau = model.tau;
    let hh = entropy(grid, &h.rho)?;
    let drho: Vec<f64> = grid.deriv(&h.momentum(), 1).iter().map(|d| -d).collect();
    let logr: Vec<f64> = h.rho.iter().map(|r| r.ln()).collect();
    let bracket = hh + tau * tau * grid.inner(&logr, &drho);

    let (h2, _) = h2_identity(grid, &h.rho)?;
    let sq: Vec<f64> = h.rho.iter().map(|r| r.sqrt()).collect();
    let dsq = grid.deriv(&sq, 1);
    let press = grid.integrate(&h.rho.iter().zip(&dsq).map(|(r, d)| model.eos.dp(*r) * d * d).collect::<Vec<_>>());
    let elec = match &model.doping {
        Some(d) => grid.integrate(&h.rho.iter().zip(&d.c).map(|(r, c)| r * (r - c)).collect::<Vec<_>>()),
        None => 0.0,
    };
    let lhs = 0.5 * h2 + 4.0 * press + elec;

    let s = sigma_field(grid, h, model.floor)?;
    let s2 = grid.integrate(&h.rho.iter().zip(&s).map(|(r, s)| r * s * s).collect::<Vec<_>>());
    let v4 = grid.integrate(&h.rho.iter().zip(&h.v).map(|(r, v)| r * v.powi(4)).collect::<Vec<_>>());
    let rhs = 4.0 * tau * tau * s2 + tau.powi(4) * v4;
    Ok((bracket, lhs, rhs))
}

/// Energy defect at every stored time, and the `I` identity defect and
/// entropy-inequality slack at interior stored times.
pub fn balance_defects(grid: &Grid, model: &Model, traj: &Trajectory) -> Result<Defects> {
    let m = traj.states.len();
    if m < 3 {
        return Err(Error::InsufficientCadence { stored: m, required: 3 });
    }
    let tau = model.tau;
    let rescaled = traj.rescaled;

    let mut i_vals = Vec::with_capacity(m);
    let mut i_rhs = Vec::with_capacity(m);
    let mut ent = Vec::with_capacity(m);
    for h in &traj.states {
        let pot = model.potential(grid, &h.rho)?;
        i_vals.push(gcp_functional(grid, h, &model.eos, &pot, tau, rescaled, model.floor)?);
        i_rhs.push(i_identity_rhs(grid, model, h, rescaled)?);
        let hr = if rescaled {
            h.clone()
        } else {
            rescale_state(h, tau, RescaleDirection::Forward).0
        };
        ent.push(entropy_terms(grid, model, &hr)?);
    }
    let t_res: Vec<f64> = traj.times.iter().map(|t| if rescaled { *t } else { t * tau }).collect();

    let mut i_identity = Vec::with_capacity(m - 2);
    let mut entropy_slack = Vec::with_capacity(m - 2);
    let mut interior_times = Vec::with_capacity(m - 2);
    for k in 1..m - 1 {
        let tt = [traj.times[k - 1], traj.times[k], traj.times[k + 1]];
        let di = centered_derivative(tt, [i_vals[k - 1], i_vals[k], i_vals[k + 1]]);
        let (s2, rhs) = i_rhs[k];
        i_identity.push(di + s2 - rhs);

        let tr = [t_res[k - 1], t_res[k], t_res[k + 1]];
        let dg = centered_derivative(tr, [ent[k - 1].0, ent[k].0, ent[k + 1].0]);
        entropy_slack.push(ent[k].2 - (dg + ent[k].1));
        interior_times.push(traj.times[k]);
    }
    Ok(Defects {
        times: traj.times.clone(),
        energy: traj.records.iter().map(|r| r.energy_defect).collect(),
        i_identity,
        entropy_slack,
        interior_times,
    })
}

/// Writes the interior defects back into the trajectory's records.
pub fn attach_defects(traj: &mut Trajectory, defects: &Defects) {
    for (k, (a, b)) in defects.i_identity.iter().zip(&defects.entropy_slack).enumerate() {
        if let Some(r) = traj.records.get_mut(k + 1) {
            r.i_defect = *a;
            r.entropy_slack = *b;
        }
    }
}

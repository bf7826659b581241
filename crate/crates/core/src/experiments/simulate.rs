//! Single runs of any of the three solvers.

use crate::diagnostics::{attach_defects, balance_defects, h2_identity, log_sobolev};
use crate::error::Result;
use crate::model::Model;
use crate::qdd::{qdd_run, QddConfig};
use crate::qhd::{qhd_run, QhdConfig};
use crate::sl::{sl_run_hydro, SlConfig};
use crate::spectral::Grid;
use crate::state::HydroState;
use crate::trajectory::Trajectory;

use super::{dat_table, num, ExperimentConfig, Solver, StudyOutput, Summary};

/// Runs the configured hydrodynamic solver (`sl` or `qhd`) from `h0`.
pub(crate) fn run_hydro(
    grid: &Grid,
    cfg: &ExperimentConfig,
    model: &Model,
    h0: &HydroState,
    dt: f64,
    rescaled: bool,
    solver: Solver,
) -> Result<Trajectory> {
    let store_every = cfg.store_every(dt);
    match solver {
        Solver::Qhd => qhd_run(
            grid,
            &QhdConfig {
                dt,
                t_final: cfg.t_final,
                model: model.clone(),
                rescaled,
                integrator: cfg.integrator,
                store_every,
                c1: cfg.c1,
                safety: cfg.safety,
            },
            h0,
        ),
        _ => sl_run_hydro(
            grid,
            &SlConfig {
                dt,
                t_final: cfg.t_final,
                model: model.clone(),
                rescaled,
                store_every,
                mode: cfg.sl_mode,
                c1: cfg.c1,
            },
            h0,
            0.0,
        ),
    }
}

/// Largest normalized defect of the H² identity and smallest log-Sobolev
/// slack over a set of densities.
pub(crate) fn identity_audit<'a>(grid: &Grid, densities: impl IntoIterator<Item = &'a Vec<f64>>) -> Result<(f64, f64)> {
    let (mut h2_defect, mut ls_slack) = (0.0f64, f64::INFINITY);
    for rho in densities {
        let (lhs, (a, b)) = h2_identity(grid, rho)?;
        h2_defect = h2_defect.max((lhs - a - 16.0 / 3.0 * b).abs() / lhs.abs().max(1.0));
        let (h, bound) = log_sobolev(grid, rho)?;
        ls_slack = ls_slack.min(bound - h);
    }
    Ok((h2_defect, ls_slack))
}

/// Tolerance of the H² identity, relative to `max(1, |left side|)`.
pub const H2_IDENTITY_TOL: f64 = 1e-8;

/// Cumulative entropy inequality may exceed `H(ρ₀)` by this fraction.
pub const ENTROPY_INEQUALITY_TOL: f64 = 1e-3;

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let grid = Grid::new(cfg.n)?;
    let h0 = cfg.initial_state(&grid)?;
    let model = cfg.model(&grid, &h0.rho, cfg.tau)?;
    let mut summary = Summary::new(cfg)?;

    if cfg.solver == Solver::Qdd {
        let mut qc = QddConfig::new(cfg.dt, cfg.t_final, model);
        qc.store_every = cfg.store_every(cfg.dt);
        let traj = qdd_run(&grid, &qc, &h0.rho)?;
        let h_init = traj.records[0].h;
        let min_slack = traj
            .records
            .iter()
            .map(|r| r.entropy_inequality_slack)
            .fold(f64::INFINITY, f64::min);
        let decreasing = traj.records.windows(2).all(|w| w[1].h < w[0].h);
        let (h2_defect, ls_slack) = identity_audit(&grid, &traj.densities)?;
        let drift = traj.max_mass_drift();
        summary.metric("solver", "qdd");
        summary.metric("steps", traj.steps);
        summary.metric("max_fixed_point_iterations", traj.max_iterations);
        summary.metric("mass_drift", num(drift));
        summary.metric("entropy_initial", num(h_init));
        summary.metric("entropy_final", num(traj.records.last().map_or(f64::NAN, |r| r.h)));
        summary.metric("min_entropy_inequality_slack", num(min_slack));
        summary.metric("h2_identity_defect", num(h2_defect));
        summary.metric("min_log_sobolev_slack", num(ls_slack));
        summary.flag("mass_conserved", drift <= cfg.mass_tol);
        summary.flag("entropy_inequality", min_slack >= -ENTROPY_INEQUALITY_TOL * h_init);
        summary.flag("entropy_decreasing", decreasing);
        summary.flag("h2_identity", h2_defect <= H2_IDENTITY_TOL);
        summary.flag("log_sobolev", ls_slack >= 0.0);
        let mut out = StudyOutput::new(cfg, summary)?;
        out.add("run.csv", traj.to_csv());
        out.add(
            "entropy.dat",
            dat_table(
                &["t", "H", "dissipation", "slack"],
                traj.records.iter().map(|r| {
                    vec![r.t, r.h, r.dissip_sqrt_h2 + r.dissip_quarter_pow4, r.entropy_inequality_slack]
                }),
            ),
        );
        return Ok(out);
    }

    let mut traj = run_hydro(&grid, cfg, &model, &h0, cfg.dt, cfg.rescaled, cfg.solver)?;
    let e0 = traj.records[0].energy.total;
    let drift = traj.max_mass_drift();
    summary.metric("solver", if cfg.solver == Solver::Qhd { "qhd" } else { "sl" });
    summary.metric("steps", traj.steps);
    summary.metric("mass_drift", num(drift));
    summary.metric("energy_initial", num(e0));
    summary.flag("mass_conserved", drift <= cfg.mass_tol);
    match balance_defects(&grid, &model, &traj) {
        Ok(d) => {
            let e_def = d.max_abs_energy();
            summary.metric("max_energy_defect", num(e_def));
            summary.metric("max_i_identity_defect", num(d.max_abs_i_identity()));
            summary.metric("min_entropy_slack", num(d.min_entropy_slack()));
            summary.flag("energy_balance", e_def <= cfg.energy_tol * e0.abs().max(f64::MIN_POSITIVE));
            attach_defects(&mut traj, &d);
        }
        Err(e) => {
            summary.metric("defects_unavailable", e.to_string());
        }
    }
    let densities: Vec<Vec<f64>> = traj.states.iter().map(|s| s.rho.clone()).collect();
    let (h2_defect, ls_slack) = identity_audit(&grid, &densities)?;
    summary.metric("h2_identity_defect", num(h2_defect));
    summary.metric("min_log_sobolev_slack", num(ls_slack));
    summary.flag("h2_identity", h2_defect <= H2_IDENTITY_TOL);
    summary.flag("log_sobolev", ls_slack >= 0.0);

    let mut out = StudyOutput::new(cfg, summary)?;
    out.add("run.csv", traj.to_csv());
    out.add(
        "energy.dat",
        dat_table(
            &["t", "E", "dissipation", "defect"],
            traj.records.iter().map(|r| vec![r.t, r.energy.total, r.dissip_v2, r.energy_defect]),
        ),
    );
    out.add(
        "functionals.dat",
        dat_table(
            &["t", "I", "H", "F"],
            traj.records.iter().map(|r| vec![r.t, r.i, r.h, r.f_tau]),
        ),
    );
    Ok(out)
}

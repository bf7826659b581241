//! Relaxation-time sweep: rescaled hydrodynamics against the drift-diffusion limit.

use serde_json::Value;

use crate::diagnostics::relative_entropy;
use crate::error::Result;
use crate::qdd::{qdd_run, QddConfig, QddTrajectory};
use crate::spectral::Grid;
use crate::state::HydroState;

use super::simulate::run_hydro;
use super::{csv_table, dat_table, num, ordered_map, sci, ExperimentConfig, RateFit, StudyOutput, Summary};

/// `∫ρ(∂ₓ² log √ρ − ∂ₓ² log √ρ̄)²`.
pub fn secondary_norm_density(grid: &Grid, rho: &[f64], rho_bar: &[f64]) -> f64 {
    let half_log = |r: &[f64]| r.iter().map(|x| 0.5 * x.ln()).collect::<Vec<f64>>();
    let a = grid.deriv(&half_log(rho), 2);
    let b = grid.deriv(&half_log(rho_bar), 2);
    let dens: Vec<f64> = rho.iter().zip(a.iter().zip(&b)).map(|(r, (a, b))| r * (a - b).powi(2)).collect();
    grid.integrate(&dens)
}

struct TauRun {
    tau: f64,
    outcome: Result<TauReport>,
}

struct TauReport {
    times: Vec<f64>,
    gaps: Vec<f64>,
    err: f64,
    rel_entropy: f64,
    secondary: f64,
    mass_drift: f64,
    steps: usize,
    csv: String,
}

fn compare(grid: &Grid, reference: &QddTrajectory, times: &[f64], states: &[HydroState], floor: f64) -> Result<(Vec<f64>, f64, f64)> {
    let mut gaps = Vec::with_capacity(times.len());
    let mut rel = 0.0f64;
    let mut sec = Vec::with_capacity(times.len());
    for (t, s) in times.iter().zip(states) {
        let rb = reference.density_at(*t);
        gaps.push(grid.l2_distance(&s.rho, &rb));
        rel = rel.max(relative_entropy(grid, &s.rho, &rb, floor)?);
        sec.push(secondary_norm_density(grid, &s.rho, &rb));
    }
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (sec[k] + sec[k - 1]);
    }
    Ok((gaps, rel, acc.sqrt()))
}

pub fn run_relaxation_sweep(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let grid = Grid::new(cfg.n)?;
    let h0 = cfg.initial_state(&grid)?;
    let base = cfg.model(&grid, &h0.rho, cfg.taus[0])?;

    let ref_dt = cfg.sweep.reference_dt.unwrap_or(cfg.dt);
    let mut qc = QddConfig::new(ref_dt, cfg.t_final, base.clone());
    qc.store_every = cfg.store_every(ref_dt);
    let reference = qdd_run(&grid, &qc, &h0.rho)?;

    let runs: Vec<TauRun> = ordered_map(cfg.parallelism, cfg.taus.len(), |k| {
        let tau = cfg.taus[k];
        let outcome = (|| {
            let model = crate::model::Model { tau, ..base.clone() };
            let traj = run_hydro(&grid, cfg, &model, &h0, cfg.dt, true, cfg.solver)?;
            let (gaps, rel_entropy, secondary) = compare(&grid, &reference, &traj.times, &traj.states, model.floor)?;
            Ok(TauReport {
                err: gaps.iter().copied().fold(0.0, f64::max),
                times: traj.times.clone(),
                gaps,
                rel_entropy,
                secondary,
                mass_drift: traj.max_mass_drift(),
                steps: traj.steps,
                csv: traj.to_csv(),
            })
        })();
        TauRun { tau, outcome }
    })?;

    let mut summary = Summary::new(cfg)?;
    let ok: Vec<(f64, &TauReport)> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|rep| (r.tau, rep)))
        .collect();
    let failed: Vec<Value> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| Value::String(format!("tau={}: {e}", r.tau))))
        .collect();
    let taus: Vec<f64> = ok.iter().map(|(t, _)| *t).collect();
    let fit_of = |f: &dyn Fn(&TauReport) -> f64| RateFit::fit(&taus, &ok.iter().map(|(_, r)| f(r)).collect::<Vec<_>>());
    let rate = fit_of(&|r| r.err);
    let entropy_rate = fit_of(&|r| r.rel_entropy);
    let secondary_rate = fit_of(&|r| r.secondary);
    let slope = |f: &Result<RateFit>| f.as_ref().map_or(f64::NAN, |f| f.slope);

    let mass_drift = ok
        .iter()
        .map(|(_, r)| r.mass_drift)
        .fold(reference.max_mass_drift(), f64::max);
    summary.metric("rate", num(slope(&rate)));
    summary.metric("entropy_rate", num(slope(&entropy_rate)));
    summary.metric("secondary_rate", num(slope(&secondary_rate)));
    summary.metric("reference_dt", num(ref_dt));
    summary.metric("reference_max_iterations", reference.max_iterations);
    summary.metric("mass_drift", num(mass_drift));
    summary.metric("failed_runs", Value::Array(failed.clone()));
    summary.flag("all_runs_completed", failed.is_empty());
    summary.flag("mass_conserved", mass_drift <= cfg.mass_tol);
    summary.flag("rate_lower_bound", slope(&rate) >= cfg.sweep.min_rate);
    summary.flag("entropy_rate_lower_bound", slope(&entropy_rate) >= cfg.sweep.min_entropy_rate);
    summary.fitted_rate = rate.ok();

    let mut out = StudyOutput::new(cfg, summary)?;
    out.add(
        "sweep.csv",
        csv_table(
            &["tau", "err_l2", "rel_entropy", "secondary", "mass_drift", "steps", "status"],
            runs.iter().map(|r| match &r.outcome {
                Ok(rep) => vec![
                    sci(r.tau),
                    sci(rep.err),
                    sci(rep.rel_entropy),
                    sci(rep.secondary),
                    sci(rep.mass_drift),
                    rep.steps.to_string(),
                    "ok".into(),
                ],
                Err(e) => {
                    let mut row = vec![sci(r.tau)];
                    row.extend(std::iter::repeat_n("nan".to_string(), 4));
                    row.push("0".into());
                    row.push(format!("\"{e}\""));
                    row
                }
            }),
        ),
    );
    out.add(
        "rate.dat",
        dat_table(
            &["tau", "err_l2", "rel_entropy", "secondary"],
            ok.iter().map(|(t, r)| vec![*t, r.err, r.rel_entropy, r.secondary]),
        ),
    );
    out.add("reference.csv", reference.to_csv());
    for (k, run) in runs.iter().enumerate() {
        let (tau, Ok(rep)) = (run.tau, &run.outcome) else { continue };
        out.add(format!("run_{k}_tau_{tau}.csv"), rep.csv.clone());
        out.add(
            format!("gap_{k}_tau_{tau}.dat"),
            dat_table(&["t", "err_l2"], rep.times.iter().zip(&rep.gaps).map(|(t, g)| vec![*t, *g])),
        );
    }
    Ok(out)
}

//! Initial layer: momentum gap to the limiting constitutive current for
//! well-prepared and ill-prepared data.

use crate::error::Result;
use crate::qdd::{constitutive_current, qdd_run, well_prepared_state, QddConfig, QddTrajectory};
use crate::spectral::Grid;
use crate::state::HydroState;

use super::simulate::run_hydro;
use super::{csv_table, dat_table, nearest_index, num, ordered_map, sci, ExperimentConfig, StudyOutput, Summary};

struct Gaps {
    times: Vec<f64>,
    gaps: Vec<f64>,
    csv: String,
    mass_drift: f64,
}

fn gap_series(
    grid: &Grid,
    cfg: &ExperimentConfig,
    model: &crate::model::Model,
    reference: &QddTrajectory,
    h0: &HydroState,
) -> Result<Gaps> {
    let traj = run_hydro(grid, cfg, model, h0, cfg.dt, true, cfg.solver)?;
    let mut gaps = Vec::with_capacity(traj.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let jbar = constitutive_current(grid, model, &reference.density_at(*t))?;
        gaps.push(grid.l2_distance(&s.momentum(), &jbar));
    }
    Ok(Gaps {
        times: traj.times.clone(),
        gaps,
        csv: traj.to_csv(),
        mass_drift: traj.max_mass_drift(),
    })
}

pub fn run_initial_layer(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let grid = Grid::new(cfg.n)?;
    let ill = cfg.initial_state(&grid)?;
    let model = cfg.model(&grid, &ill.rho, cfg.tau)?;
    let well = well_prepared_state(&grid, &model, &ill.rho)?;

    let ref_dt = cfg.layer.reference_dt.unwrap_or(cfg.dt);
    let mut qc = QddConfig::new(ref_dt, cfg.t_final, model.clone());
    qc.store_every = cfg.store_every(ref_dt);
    let reference = qdd_run(&grid, &qc, &ill.rho)?;

    let starts = [&ill, &well];
    let mut runs = ordered_map(cfg.parallelism, 2, |k| gap_series(&grid, cfg, &model, &reference, starts[k]))?.into_iter();
    let ill_gaps = runs.next().expect("two runs")?;
    let well_gaps = runs.next().expect("two runs")?;

    let probe = nearest_index(&ill_gaps.times, cfg.layer.probe_time);
    let ill0 = ill_gaps.gaps[0];
    let ill_probe = ill_gaps.gaps[probe];
    let well0 = well_gaps.gaps[0];
    let well_max = well_gaps.gaps.iter().copied().fold(0.0, f64::max);
    let jbar0 = grid.l2_norm(&constitutive_current(&grid, &model, &ill.rho)?);
    let drift = ill_gaps.mass_drift.max(well_gaps.mass_drift).max(reference.max_mass_drift());

    let mut summary = Summary::new(cfg)?;
    summary.metric("probe_time", num(ill_gaps.times[probe]));
    summary.metric("ill_gap_initial", num(ill0));
    summary.metric("ill_gap_probe", num(ill_probe));
    summary.metric("ill_collapse_ratio", num(ill0 / ill_probe));
    summary.metric("well_gap_initial", num(well0));
    summary.metric("well_gap_max", num(well_max));
    summary.metric("well_gap_max_relative_to_current", num(well_max / jbar0));
    summary.metric("constitutive_current_initial_norm", num(jbar0));
    summary.metric("mass_drift", num(drift));
    summary.flag("ill_prepared_collapse", ill0 >= cfg.layer.collapse_factor * ill_probe);
    summary.flag("well_prepared_bounded", well_max <= cfg.layer.well_factor * well0);
    summary.flag("mass_conserved", drift <= cfg.mass_tol);

    let mut out = StudyOutput::new(cfg, summary)?;
    out.add(
        "layer.csv",
        csv_table(
            &["t", "gap_ill", "gap_well"],
            ill_gaps
                .times
                .iter()
                .zip(ill_gaps.gaps.iter().zip(&well_gaps.gaps))
                .map(|(t, (a, b))| vec![sci(*t), sci(*a), sci(*b)]),
        ),
    );
    out.add(
        "layer.dat",
        dat_table(
            &["t", "gap_ill", "gap_well"],
            ill_gaps
                .times
                .iter()
                .zip(ill_gaps.gaps.iter().zip(&well_gaps.gaps))
                .map(|(t, (a, b))| vec![*t, *a, *b]),
        ),
    );
    out.add("run_ill.csv", ill_gaps.csv);
    out.add("run_well.csv", well_gaps.csv);
    out.add("reference.csv", reference.to_csv());
    Ok(out)
}

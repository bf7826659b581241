//! Cross-solver validation: wave-function and direct hydrodynamic runs from
//! the same data, over a refinement table.

use crate::error::Result;
use crate::spectral::Grid;
use crate::state::{polar_decompose, WaveState};

use super::simulate::run_hydro;
use super::{csv_table, dat_table, num, ordered_map, sci, ExperimentConfig, Level, Solver, StudyOutput, Summary};

/// Largest pointwise `||∂ₓψ|² − (∂ₓ√ρ)² − Λ²|`, with `∂ₓ√ρ` taken as the
/// spectral derivative of `|ψ|` rather than from the polar factor.
pub fn polar_defect(grid: &Grid, w: &WaveState, floor: f64) -> Result<f64> {
    let polar = polar_decompose(grid, w, floor)?;
    let dpsi = grid.deriv_complex(&w.psi, 1);
    let dsq = grid.deriv(&polar.sqrt_rho, 1);
    Ok(dpsi
        .iter()
        .zip(dsq.iter().zip(&polar.lambda))
        .map(|(d, (s, l))| (d.norm_sqr() - s * s - l * l).abs())
        .fold(0.0, f64::max))
}

struct LevelReport {
    level: Level,
    times: Vec<f64>,
    distances: Vec<f64>,
    polar: f64,
    drift_sl: f64,
    drift_qhd: f64,
}

fn run_level(cfg: &ExperimentConfig, level: Level) -> Result<LevelReport> {
    let grid = Grid::new(level.n)?;
    let h0 = cfg.initial_state(&grid)?;
    let model = cfg.model(&grid, &h0.rho, cfg.tau)?;
    let sl = run_hydro(&grid, cfg, &model, &h0, level.dt, cfg.rescaled, Solver::Sl)?;
    let qhd = run_hydro(&grid, cfg, &model, &h0, level.dt, cfg.rescaled, Solver::Qhd)?;
    let distances = sl
        .states
        .iter()
        .zip(&qhd.states)
        .map(|(a, b)| grid.l2_distance(&a.rho, &b.rho).max(grid.l2_distance(&a.v, &b.v)))
        .collect();
    let mut polar = 0.0f64;
    for w in &sl.waves {
        polar = polar.max(polar_defect(&grid, w, model.floor)?);
    }
    Ok(LevelReport {
        level,
        times: sl.times.clone(),
        distances,
        polar,
        drift_sl: sl.max_mass_drift(),
        drift_qhd: qhd.max_mass_drift(),
    })
}

pub fn run_validate(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    let levels = cfg.levels();
    let reports: Vec<LevelReport> = ordered_map(cfg.parallelism, levels.len(), |k| run_level(cfg, levels[k]))?
        .into_iter()
        .collect::<Result<_>>()?;

    let dist: Vec<f64> = reports
        .iter()
        .map(|r| r.distances.iter().copied().fold(0.0, f64::max))
        .collect();
    let finest = *dist.last().expect("at least one level");
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let polar = reports.iter().map(|r| r.polar).fold(0.0, f64::max);
    let drift = reports.iter().map(|r| r.drift_sl.max(r.drift_qhd)).fold(0.0, f64::max);

    let mut summary = Summary::new(cfg)?;
    summary.metric("finest_distance", num(finest));
    summary.metric("distances", serde_json::Value::Array(dist.iter().map(|d| num(*d)).collect()));
    summary.metric("max_polar_defect", num(polar));
    summary.metric("mass_drift", num(drift));
    summary.flag("distance_within_tol", finest <= cfg.validate.distance_tol);
    summary.flag("refinement_monotone", monotone);
    summary.flag("polar_identity", polar <= cfg.validate.polar_tol);
    summary.flag("mass_conserved", drift <= cfg.mass_tol);

    let mut out = StudyOutput::new(cfg, summary)?;
    out.add(
        "validate.csv",
        csv_table(
            &["n", "dt", "distance", "polar_defect", "mass_drift_sl", "mass_drift_qhd"],
            reports.iter().zip(&dist).map(|(r, d)| {
                vec![
                    r.level.n.to_string(),
                    sci(r.level.dt),
                    sci(*d),
                    sci(r.polar),
                    sci(r.drift_sl),
                    sci(r.drift_qhd),
                ]
            }),
        ),
    );
    out.add(
        "refinement.dat",
        dat_table(
            &["n", "dt", "distance"],
            reports.iter().zip(&dist).map(|(r, d)| vec![r.level.n as f64, r.level.dt, *d]),
        ),
    );
    let last = reports.last().expect("at least one level");
    out.add(
        "distance.dat",
        dat_table(
            &["t", "distance"],
            last.times.iter().zip(&last.distances).map(|(t, d)| vec![*t, *d]),
        ),
    );
    Ok(out)
}

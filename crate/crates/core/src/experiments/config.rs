//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::qhd::Integrator;
use crate::sl::SlMode;
use crate::spectral::Grid;
use crate::state::{random_hydro_state, DopingProfile, Eos, HydroState, DEFAULT_FLOOR_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    Sweep,
    Decay,
    Layer,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Sweep => "sweep",
            Experiment::Decay => "decay",
            Experiment::Layer => "layer",
            Experiment::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Wave-function integrator.
    #[default]
    Sl,
    /// Direct hydrodynamic integrator.
    Qhd,
    /// Drift-diffusion limit; `simulate` only.
    Qdd,
}

/// Initial density and velocity. Velocities are given in the run's output
/// frame, so a rescaled run reads them as `v_τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant {
        value: f64,
    },
    /// `ρ = mean + amplitude·cos(2π·mode·x)`, `v = velocity_amplitude·sin(2π·velocity_mode·x)`.
    CosinePerturbation {
        #[serde(default = "one")]
        mean: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
        #[serde(default)]
        velocity_amplitude: f64,
        #[serde(default = "one_u32")]
        velocity_mode: u32,
    },
    Table {
        rho: Vec<f64>,
        #[serde(default)]
        v: Vec<f64>,
    },
    /// Smooth random state drawn from the top-level `seed`.
    Random,
}

/// Background charge. Its mean is always matched to the initial mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum DopingConfig {
    Uniform,
    CosinePerturbation {
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// Samples whose mean must equal the initial mass.
    Table { c: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    /// Step of the drift-diffusion reference; defaults to `dt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_dt: Option<f64>,
    pub min_rate: f64,
    pub min_entropy_rate: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            reference_dt: None,
            min_rate: 0.8,
            min_entropy_rate: 1.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayOptions {
    /// Number of further `c₁` values tried below the default.
    pub c1_scan_steps: usize,
    pub c1_scan_factor: f64,
    /// Share of the final dissipation budget that ends the transient.
    pub transient_fraction: f64,
    /// Samples with `F < tail_cutoff·F(0)` sit at round-off level and are excluded.
    pub tail_cutoff: f64,
    /// Decay is only asserted for `τ` at or below this value.
    pub assert_tau_max: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            c1_scan_steps: 4,
            c1_scan_factor: 0.1,
            transient_fraction: 0.99,
            tail_cutoff: 1e-10,
            assert_tau_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_dt: Option<f64>,
    pub probe_time: f64,
    /// Required ratio between the ill-prepared gap at `t = 0` and at the probe time.
    pub collapse_factor: f64,
    /// Allowed growth of the well-prepared gap over its value at `t = 0`.
    pub well_factor: f64,
}

impl Default for LayerOptions {
    fn default() -> Self {
        Self {
            reference_dt: None,
            probe_time: 0.1,
            collapse_factor: 10.0,
            well_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub n: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateOptions {
    /// Refinement table, coarse to fine. Empty means the top-level `(n, dt)` only.
    pub levels: Vec<Level>,
    pub distance_tol: f64,
    pub polar_tol: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            levels: Vec::new(),
            distance_tol: 1e-5,
            polar_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Stored samples over `[0, t_final]`, not counting `t = 0`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "one")]
    pub tau: f64,
    /// Relaxation times for `sweep`, strictly decreasing.
    #[serde(default)]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub rescaled: bool,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub sl_mode: SlMode,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Density floor; defaults to a fixed fraction of the mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default = "one_usize")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_mass_tol")]
    pub mass_tol: f64,
    /// Relative energy-balance tolerance for `simulate`.
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default = "default_eos")]
    pub eos: Eos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doping: Option<DopingConfig>,
    pub initial: InitialCondition,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default)]
    pub decay: DecayOptions,
    #[serde(default)]
    pub layer: LayerOptions,
    #[serde(default)]
    pub validate: ValidateOptions,
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn one_usize() -> usize {
    1
}
fn default_samples() -> usize {
    100
}
fn default_safety() -> f64 {
    0.5
}
fn default_mass_tol() -> f64 {
    1e-10
}
fn default_energy_tol() -> f64 {
    1e-6
}
fn default_eos() -> Eos {
    Eos::Zero
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n)?;
        self.eos.validate()?;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {x}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        positive("tau", self.tau)?;
        positive("safety", self.safety)?;
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        if self.parallelism == 0 {
            return Err(invalid("parallelism must be at least 1"));
        }
        if let Some(f) = self.floor {
            if !(f >= 0.0) {
                return Err(invalid(format!("floor must be nonnegative, got {f}")));
            }
        }
        if self.taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid("taus must all be positive"));
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("taus must be strictly decreasing"));
        }
        match self.experiment {
            Experiment::Sweep => {
                if self.taus.len() < 3 {
                    return Err(invalid("sweep needs at least 3 taus"));
                }
                if self.solver == Solver::Qdd {
                    return Err(invalid("sweep runs the hydrodynamic solver; choose sl or qhd"));
                }
            }
            Experiment::Decay | Experiment::Layer if self.solver == Solver::Qdd => {
                return Err(invalid("choose sl or qhd for this experiment"));
            }
            Experiment::Validate => {
                for l in &self.validate.levels {
                    Grid::new(l.n)?;
                    positive("level dt", l.dt)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Canonical TOML echo. The output directory and the parallelism
    /// degree are left out because neither affects results.
    pub fn echo(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = None;
        c.parallelism = 1;
        toml::to_string(&c).map_err(|e| invalid(e.to_string()))
    }

    /// SHA-256 of [`echo`](Self::echo), hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.echo()?.as_bytes())))
    }

    /// Levels of the refinement table.
    pub fn levels(&self) -> Vec<Level> {
        if self.validate.levels.is_empty() {
            vec![Level { n: self.n, dt: self.dt }]
        } else {
            self.validate.levels.clone()
        }
    }

    /// Steps between stored samples for a run with step `dt`.
    pub fn store_every(&self, dt: f64) -> usize {
        let steps = (self.t_final / dt).round() as usize;
        (steps / self.samples).max(1)
    }

    pub fn initial_state(&self, grid: &Grid) -> Result<HydroState> {
        let h = match &self.initial {
            InitialCondition::Constant { value } => HydroState::constant(grid, *value),
            InitialCondition::CosinePerturbation {
                mean,
                amplitude,
                mode,
                velocity_amplitude,
                velocity_mode,
            } => {
                let (m, vm) = (*mode as f64, *velocity_mode as f64);
                HydroState::new(
                    grid.sample(|x| mean + amplitude * (2.0 * PI * m * x).cos()),
                    grid.sample(|x| velocity_amplitude * (2.0 * PI * vm * x).sin()),
                )
            }
            InitialCondition::Table { rho, v } => {
                if rho.len() != grid.n() {
                    return Err(invalid(format!("initial rho has {} samples, grid has {}", rho.len(), grid.n())));
                }
                let v = if v.is_empty() { vec![0.0; grid.n()] } else { v.clone() };
                if v.len() != grid.n() {
                    return Err(invalid(format!("initial v has {} samples, grid has {}", v.len(), grid.n())));
                }
                HydroState::new(rho.clone(), v)
            }
            InitialCondition::Random => random_hydro_state(grid, self.seed),
        };
        if !(h.min_rho() > 0.0) {
            return Err(invalid("initial density must be positive"));
        }
        Ok(h)
    }

    /// Physical model on `grid` for relaxation time `tau`, with the doping
    /// mean matched to the mass of `rho0`.
    pub fn model(&self, grid: &Grid, rho0: &[f64], tau: f64) -> Result<Model> {
        let m0 = grid.integrate(rho0);
        let doping = match &self.doping {
            None => None,
            Some(DopingConfig::Uniform) => Some(DopingProfile::uniform(grid, m0)),
            Some(DopingConfig::CosinePerturbation { amplitude, mode }) => {
                let m = *mode as f64;
                let c = grid.sample(|x| m0 + amplitude * (2.0 * PI * m * x).cos());
                Some(DopingProfile::new(grid, c, m0)?)
            }
            Some(DopingConfig::Table { c }) => {
                if c.len() != grid.n() {
                    return Err(invalid(format!("doping table has {} samples, grid has {}", c.len(), grid.n())));
                }
                Some(DopingProfile::new(grid, c.clone(), m0)?)
            }
        };
        let floor = self
            .floor
            .unwrap_or(DEFAULT_FLOOR_FRACTION * m0);
        let model = Model {
            eos: self.eos,
            doping,
            tau,
            floor,
        };
        model.validate(grid)?;
        Ok(model)
    }
}

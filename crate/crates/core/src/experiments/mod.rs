//! Configurable studies and their on-disk reports.
//!
//! Every study returns a [`StudyOutput`]: a JSON summary plus named text
//! files (CSV series and whitespace-separated `.dat` tables). Nothing in
//! the output depends on wall-clock time or thread scheduling.

mod config;
mod decay;
mod fit;
mod layer;
mod simulate;
mod sweep;
mod validate;

use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub use config::{
    DecayOptions, DopingConfig, Experiment, ExperimentConfig, InitialCondition, LayerOptions, Level, Solver,
    SweepOptions, ValidateOptions,
};
pub use decay::{lyapunov_series, run_entropy_decay, tau0_heuristic};
pub use fit::{line_fit, RateFit};
pub use layer::run_initial_layer;
pub use simulate::run_simulate;
pub use sweep::{run_relaxation_sweep, secondary_norm_density};
pub use validate::{polar_defect, run_validate};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub config_hash: String,
    pub metrics: BTreeMap<String, Value>,
    pub fitted_rate: Option<RateFit>,
    pub pass_flags: BTreeMap<String, bool>,
}

impl Summary {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            experiment: cfg.experiment.name().to_string(),
            config_hash: cfg.hash()?,
            metrics: BTreeMap::new(),
            fitted_rate: None,
            pass_flags: BTreeMap::new(),
        })
    }

    fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    fn flag(&mut self, key: &str, pass: bool) {
        self.pass_flags.insert(key.to_string(), pass);
    }

    pub fn all_pass(&self) -> bool {
        self.pass_flags.values().all(|p| *p)
    }

    /// Numeric metric by name, if present.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub summary: Summary,
    /// Config echo, then study files, in write order.
    pub files: Vec<(String, String)>,
}

impl StudyOutput {
    fn new(cfg: &ExperimentConfig, summary: Summary) -> Result<Self> {
        Ok(Self {
            summary,
            files: vec![("config.toml".to_string(), cfg.echo()?)],
        })
    }

    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes every file and `summary.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        std::fs::write(dir.join("summary.json"), self.summary_json())?;
        Ok(())
    }
}

/// Dispatches on `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Simulate => run_simulate(cfg),
        Experiment::Sweep => run_relaxation_sweep(cfg),
        Experiment::Decay => run_entropy_decay(cfg),
        Experiment::Layer => run_initial_layer(cfg),
        Experiment::Validate => run_validate(cfg),
    }
}

/// Maps `f` over `0..count` on a pool of `degree` threads, keeping input order.
pub(crate) fn ordered_map<T, F>(degree: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(degree.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

/// Whitespace-separated table with a `#` header line.
pub(crate) fn dat_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("# {}\n", header.join(" "));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Comma-separated table with a header line.
pub(crate) fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `{:e}` rendering of a float for tables.
pub(crate) fn sci(x: f64) -> String {
    format!("{x:e}")
}

/// JSON number, or `null` for non-finite values.
pub(crate) fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Stored index closest to `t`.
pub(crate) fn nearest_index(times: &[f64], t: f64) -> usize {
    times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

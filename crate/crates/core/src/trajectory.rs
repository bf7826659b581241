//! Stored output of a time integration.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsRecord, CSV_HEADER};
use crate::state::{HydroState, WaveState};

/// States and diagnostics at the stored times of a run.
///
/// Hydrodynamic states are in the run's output frame: rescaled runs report
/// `(ρ, v_τ)` against diffusive time. `waves` is filled by the
/// wave-function solver only and always holds the physical-time `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rescaled: bool,
    pub tau: f64,
    pub times: Vec<f64>,
    pub states: Vec<HydroState>,
    pub waves: Vec<WaveState>,
    pub records: Vec<DiagnosticsRecord>,
    /// Number of solver steps taken, counting subcycles.
    pub steps: usize,
}

impl Trajectory {
    pub fn new(rescaled: bool, tau: f64) -> Self {
        Self {
            rescaled,
            tau,
            times: Vec::new(),
            states: Vec::new(),
            waves: Vec::new(),
            records: Vec::new(),
            steps: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&HydroState> {
        self.states.last()
    }

    /// Largest `|M(t) − M(0)| / M(0)` over stored times.
    pub fn max_mass_drift(&self) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        self.records
            .iter()
            .map(|r| ((r.mass - first.mass) / first.mass).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Stepping schedule: `steps` steps of size `dt`, with states stored every
/// `store_every` steps and at the final step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Schedule {
    pub steps: usize,
    pub store_every: usize,
}

impl Schedule {
    pub fn new(t_final: f64, dt: f64, store_every: usize) -> crate::Result<(Self, f64)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(crate::Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(crate::Error::InvalidConfig(format!("t_final must be nonnegative, got {t_final}")));
        }
        let steps = (t_final / dt).round() as usize;
        let dt = if steps > 0 { t_final / steps as f64 } else { dt };
        Ok((
            Self {
                steps,
                store_every: store_every.max(1),
            },
            dt,
        ))
    }

    pub fn stores(&self, step: usize) -> bool {
        step.is_multiple_of(self.store_every) || step == self.steps
    }
}

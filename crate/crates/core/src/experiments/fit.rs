//! Least-squares power-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fit of `log err = slope·log τ + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the log-space residuals.
    pub residual: f64,
}

impl RateFit {
    pub fn fit(taus: &[f64], errors: &[f64]) -> Result<Self> {
        if taus.len() != errors.len() {
            return Err(Error::InvalidConfig("rate fit needs as many errors as taus".into()));
        }
        if taus.len() < 3 {
            return Err(Error::InsufficientCadence {
                stored: taus.len(),
                required: 3,
            });
        }
        if taus.iter().chain(errors).any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidConfig("rate fit needs positive finite data".into()));
        }
        let (slope, intercept) = line_fit(
            &taus.iter().map(|t| t.ln()).collect::<Vec<_>>(),
            &errors.iter().map(|e| e.ln()).collect::<Vec<_>>(),
        );
        let residual = (taus
            .iter()
            .zip(errors)
            .map(|(t, e)| (e.ln() - slope * t.ln() - intercept).powi(2))
            .sum::<f64>()
            / taus.len() as f64)
            .sqrt();
        Ok(Self {
            taus: taus.to_vec(),
            errors: errors.to_vec(),
            slope,
            intercept,
            residual,
        })
    }
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

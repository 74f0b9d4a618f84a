//! Tracking-performance integrals, all by trapezoidal quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(times: &[f64], values: &[f64]) -> Result<()> {
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::domain(format!(
            "metric needs equally long, non-empty series (got {} times, {} values)",
            times.len(),
            values.len()
        )));
    }
    if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::domain("metric timestamps must be strictly increasing"));
    }
    Ok(())
}

fn trapezoid(times: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    times
        .windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .sum()
}

/// `√(∫e² dt / (t₁ − t₀))`; a single sample returns `|e|`.
pub fn rmse(times: &[f64], values: &[f64]) -> Result<f64> {
    check(times, values)?;
    let span = times[times.len() - 1] - times[0];
    if span == 0.0 {
        return Ok(values[0].abs());
    }
    Ok((trapezoid(times, |i| values[i] * values[i]) / span).sqrt())
}

/// `∫|e| dt`
pub fn iae(times: &[f64], values: &[f64]) -> Result<f64> {
    check(times, values)?;
    Ok(trapezoid(times, |i| values[i].abs()))
}

/// `∫t·|e| dt`
pub fn itae(times: &[f64], values: &[f64]) -> Result<f64> {
    check(times, values)?;
    Ok(trapezoid(times, |i| times[i] * values[i].abs()))
}

/// `∫e² dt`
pub fn ise(times: &[f64], values: &[f64]) -> Result<f64> {
    check(times, values)?;
    Ok(trapezoid(times, |i| values[i] * values[i]))
}

/// Per-run performance summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario_id: String,
    pub controller: String,
    /// RMSE of each configuration coordinate `(κ₁, φ₁, κ₂, φ₂)`.
    pub rmse: [f64; 4],
    /// Integrals of the curvature error `‖(e_κ₁, e_κ₂)‖`.
    pub iae: f64,
    pub itae: f64,
    pub ise: f64,
    pub max_curvature_error: f64,
    /// Certified impedance rate constant, when the admittance loop is active.
    pub alpha: Option<f64>,
}

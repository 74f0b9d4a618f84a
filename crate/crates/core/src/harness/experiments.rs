//! Canned experiments shared by the CLI and the test suites.

use nalgebra::{SVector, Vector4};
use serde::{Deserialize, Serialize};

use super::integrator::rk4_step;
use super::metrics::MetricsSummary;
use super::scenario::{ControllerKind, Scenario};
use super::simulation::run_scenario;
use crate::dynamics::{conservative_vector, solve_acceleration, DynamicsTerms};
use crate::error::{Error, Result};
use crate::estimator::{residual_reference, ResidualEstimator};
use crate::params::RobotParams;

/// Runs ABSM, SM and PD on copies of `scenario`, in parallel.
pub fn compare_controllers(scenario: &Scenario) -> Result<Vec<MetricsSummary>> {
    scenario.validate()?;
    let kinds = [ControllerKind::Absm, ControllerKind::Sm, ControllerKind::Pd];
    std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&controller| {
                let s = Scenario {
                    controller,
                    ..scenario.clone()
                };
                scope.spawn(move || run_scenario(&s).map(|r| r.metrics))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join().unwrap_or_else(|_| {
                    Err(Error::Simulation {
                        time: f64::NAN,
                        reason: "comparison worker panicked".into(),
                    })
                })
            })
            .collect()
    })
}

/// Residual response to a constant load on an arm held still.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub gain: f64,
    pub times: Vec<f64>,
    /// First component of the residual, normalized by the load.
    pub normalized_residual: Vec<f64>,
    /// `max_t ‖r(t) − τ_e(1 − e^{−K_I t})‖∞ / ‖τ_e‖∞`
    pub max_relative_model_error: f64,
    /// Mean of `‖r − τ_e‖∞ / ‖τ_e‖∞` over the window.
    pub mean_relative_tracking_error: f64,
    /// `‖r − τ_e‖∞ / ‖τ_e‖∞` at the end of the window.
    pub final_relative_error: f64,
}

/// Holds the arm at `omega` with `τ_c = N(Ω) − τ_e`, applies the constant
/// generalized load `load` from t = 0, and runs the estimator alongside the
/// integrated plant.
pub fn estimator_step_response(
    omega: &Vector4<f64>,
    load: &Vector4<f64>,
    gain: f64,
    dt: f64,
    duration: f64,
    params: &RobotParams,
) -> Result<StepResponse> {
    let mut estimator = ResidualEstimator::new(omega, &Vector4::zeros(), params, gain)?;
    let hold = conservative_vector(omega, params) - load;
    let mut x = SVector::<f64, 8>::zeros();
    x.fixed_rows_mut::<4>(0).copy_from(omega);
    let steps = (duration / dt).round() as usize;
    let scale = load.amax();
    if scale == 0.0 {
        return Err(Error::domain("step load must be non-zero"));
    }
    let mut times = vec![0.0];
    let mut normalized = vec![0.0];
    let (mut max_model, mut sum_track, mut last) = (0.0f64, (*load).amax() / scale, 1.0);
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        let mut drives = [Vector4::zeros(); 4];
        let mut stage = 0;
        x = rk4_step(&x, t0, dt, |_, s| {
            let w: Vector4<f64> = s.fixed_rows::<4>(0).into_owned();
            let wd: Vector4<f64> = s.fixed_rows::<4>(4).into_owned();
            drives[stage] = hold - conservative_vector(&w, params);
            stage += 1;
            let terms = DynamicsTerms::at(&w, &wd, params);
            let acc = solve_acceleration(&terms, &wd, &(hold + load))?;
            let mut d = SVector::<f64, 8>::zeros();
            d.fixed_rows_mut::<4>(0).copy_from(&wd);
            d.fixed_rows_mut::<4>(4).copy_from(&acc);
            Ok(d)
        })?;
        let w: Vector4<f64> = x.fixed_rows::<4>(0).into_owned();
        let wd: Vector4<f64> = x.fixed_rows::<4>(4).into_owned();
        let impulse = (drives[0] + drives[1] * 2.0 + drives[2] * 2.0 + drives[3]) * (dt / 6.0);
        let r = estimator.update_with_impulse(&w, &wd, &impulse, dt, params)?;
        let t = k as f64 * dt;
        let model_err = (r - residual_reference(load, gain, t)).amax() / scale;
        let track_err = (r - load).amax() / scale;
        max_model = max_model.max(model_err);
        sum_track += track_err;
        last = track_err;
        times.push(t);
        normalized.push(r[0] / load[0]);
    }
    Ok(StepResponse {
        gain,
        times,
        normalized_residual: normalized,
        max_relative_model_error: max_model,
        mean_relative_tracking_error: sum_track / (steps + 1) as f64,
        final_relative_error: last,
    })
}

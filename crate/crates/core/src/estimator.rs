//! Generalized-momentum residual for external loads.
//!
//! With `P = M(Ω)Ω̇`, the residual
//!
//! `r(t) = K_I [P(t) − P(0) − ∫₀ᵗ (τ_c − N(Ω) + r) ds]`
//!
//! obeys `ṙ ≈ K_I (τ_e − r)` when the Coriolis term `CᵀΩ̇` is negligible, so
//! `r` is a first-order filtered copy of the external generalized force.
//!
//! Between samples the driving term `Δy/dt` is held constant, which makes the
//! discrete residual the exact zero-order-hold solution of the filter ODE:
//! `r_k = e^{−K_I dt} r_{k−1} + (1 − e^{−K_I dt}) Δy_k/dt` with
//! `Δy_k = P_k − P_{k−1} − ∫(τ_c − N)`. The running integral is kept so that
//! the defining identity above holds at every sample.

use nalgebra::Vector4;

use crate::dynamics::{conservative_vector, mass_matrix};
use crate::error::{Error, Result};
use crate::params::RobotParams;

/// Default observer gain.
pub const DEFAULT_GAIN: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualEstimator {
    /// Generalized momentum at the last update.
    pub momentum: Vector4<f64>,
    /// Running integral of `τ_c − N + r`.
    pub integral: Vector4<f64>,
    pub residual: Vector4<f64>,
    pub gain: f64,
    pub initial_momentum: Vector4<f64>,
    /// `τ_c − N` at the last update, for the trapezoidal integral.
    last_drive: Option<Vector4<f64>>,
}

impl ResidualEstimator {
    pub fn new(omega: &Vector4<f64>, omega_dot: &Vector4<f64>, params: &RobotParams, gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::domain(format!("estimator gain must be positive, got {gain}")));
        }
        let p0 = mass_matrix(omega, params) * omega_dot;
        Ok(Self {
            momentum: p0,
            integral: Vector4::zeros(),
            residual: Vector4::zeros(),
            gain,
            initial_momentum: p0,
            last_drive: None,
        })
    }

    /// Advances with the trapezoidal integral of `τ_c − N(Ω)` over the step.
    ///
    /// `tau_c` is the control torque applied during the step and `(Ω, Ω̇)`
    /// the state at its end.
    pub fn update(
        &mut self,
        omega: &Vector4<f64>,
        omega_dot: &Vector4<f64>,
        tau_c: &Vector4<f64>,
        dt: f64,
        params: &RobotParams,
    ) -> Result<Vector4<f64>> {
        let drive = tau_c - conservative_vector(omega, params);
        let prev = self.last_drive.unwrap_or(drive);
        let impulse = (prev + drive) * (0.5 * dt);
        self.last_drive = Some(drive);
        self.update_with_impulse(omega, omega_dot, &impulse, dt, params)
    }

    /// Advances with a caller-supplied `∫(τ_c − N)` over the step, e.g. the
    /// quadrature weights of the plant integrator.
    pub fn update_with_impulse(
        &mut self,
        omega: &Vector4<f64>,
        omega_dot: &Vector4<f64>,
        impulse: &Vector4<f64>,
        dt: f64,
        params: &RobotParams,
    ) -> Result<Vector4<f64>> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain(format!("estimator step must be positive, got {dt}")));
        }
        let momentum = mass_matrix(omega, params) * omega_dot;
        let dy = momentum - self.momentum - impulse;
        let decay = (-self.gain * dt).exp();
        let residual = self.residual * decay + dy * ((1.0 - decay) / dt);
        if residual.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("estimator residual became non-finite"));
        }
        self.momentum = momentum;
        self.residual = residual;
        self.integral = momentum - self.initial_momentum - residual / self.gain;
        Ok(residual)
    }

    /// Residual of the continuous-time observer for a given momentum and
    /// running integral: `K_I (P − P₀ − ∫(τ_c − N + r))`.
    ///
    /// Integrating `d/dt ∫ = τ_c − N + r` together with the plant gives the
    /// observer in state-space form, which is how the closed-loop harness runs
    /// it.
    pub fn residual_for(&self, momentum: &Vector4<f64>, integral: &Vector4<f64>) -> Vector4<f64> {
        (momentum - self.initial_momentum - integral) * self.gain
    }

    /// `K_I (P − P₀ − ∫(τ_c − N + r))`, which equals `residual` by construction.
    pub fn defining_identity(&self) -> Vector4<f64> {
        (self.momentum - self.initial_momentum - self.integral) * self.gain
    }
}

/// First-order response `τ_e (1 − e^{−K_I t})` to a constant load.
pub fn residual_reference(load: &Vector4<f64>, gain: f64, t: f64) -> Vector4<f64> {
    load * (1.0 - (-gain * t).exp())
}

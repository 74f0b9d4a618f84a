//! Tracking controllers in configuration space.
//!
//! All three laws act on the nominal model terms `M̄, C̄, N̄` and a reference
//! trajectory `(Ω_d, Ω̇_d, Ω̈_d)`:
//!
//! * ABSM: back-stepping sliding mode with an adaptive lumped-uncertainty
//!   estimate `D̂`;
//! * SM: the same sliding surface without adaptation and with unit reaching
//!   gain;
//! * PD: computed torque with `u = Ω̈_d − K_D ė − K_P e`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsTerms;
use crate::error::{Error, Result};

/// Desired configuration trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub omega: Vector4<f64>,
    pub omega_dot: Vector4<f64>,
    pub omega_ddot: Vector4<f64>,
}

impl Reference {
    pub fn constant(omega: Vector4<f64>) -> Self {
        Self {
            omega,
            ..Default::default()
        }
    }
}

/// Tracking errors and the sliding variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingErrors {
    /// `e_p = Ω − Ω_d`
    pub position: Vector4<f64>,
    /// `ė_p = Ω̇ − Ω̇_d`
    pub position_rate: Vector4<f64>,
    /// `σ = ε·e_p`
    pub virtual_control: Vector4<f64>,
    /// `e_v = ė_p + σ`
    pub velocity: Vector4<f64>,
    /// `s = λ·e_p + e_v`
    pub sliding: Vector4<f64>,
}

/// Gains shared by the ABSM and SM laws. ε is applied as `ε·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsmParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub nu: f64,
    /// Boundary-layer width of the tanh switching term.
    pub delta: f64,
    /// Adaptation gain.
    pub eta: f64,
}

impl Default for AbsmParams {
    fn default() -> Self {
        Self {
            epsilon: 2.9,
            lambda: 10.5,
            gamma: 1.1,
            nu: 1.9,
            delta: 0.05,
            eta: 1000.0,
        }
    }
}

impl AbsmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("nu", self.nu),
            ("delta", self.delta),
            ("eta", self.eta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("ABSM gain {name} must be positive, got {v}")));
            }
        }
        if self.phi_norm() < 0.0 {
            return Err(Error::domain(format!(
                "ν(ε + λ) − 0.25 = {} is negative; the Lyapunov weight is indefinite",
                self.phi_norm()
            )));
        }
        Ok(())
    }

    /// `ν(ε + λ) − 0.25`, the determinant of the per-channel weight Φ.
    pub fn phi_norm(&self) -> f64 {
        self.nu * (self.epsilon + self.lambda) - 0.25
    }

    /// Per-channel 2×2 weight `Φ = [[ε + νλ², νλ − ½], [νλ − ½, ν]]` acting on
    /// `(e_p, e_v)`.
    pub fn phi(&self) -> Matrix2<f64> {
        let off = self.nu * self.lambda - 0.5;
        Matrix2::new(
            self.epsilon + self.nu * self.lambda * self.lambda,
            off,
            off,
            self.nu,
        )
    }
}

/// Computed-torque PD gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdParams {
    pub kp: f64,
    pub kd: f64,
}

impl Default for PdParams {
    fn default() -> Self {
        Self { kp: 125.0, kd: 5.0 }
    }
}

impl PdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp.is_finite() && self.kp > 0.0 && self.kd.is_finite() && self.kd > 0.0) {
            return Err(Error::domain(format!(
                "PD gains must be positive, got K_P = {}, K_D = {}",
                self.kp, self.kd
            )));
        }
        Ok(())
    }
}

pub fn compute_errors(
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    reference: &Reference,
    params: &AbsmParams,
) -> TrackingErrors {
    let position = omega - reference.omega;
    let position_rate = omega_dot - reference.omega_dot;
    let virtual_control = position * params.epsilon;
    let velocity = position_rate + virtual_control;
    let sliding = position * params.lambda + velocity;
    TrackingErrors {
        position,
        position_rate,
        virtual_control,
        velocity,
        sliding,
    }
}

fn smoothed_switch(s: &Vector4<f64>, delta: f64) -> Vector4<f64> {
    s.map(|v| (v / delta).tanh())
}

/// Shared back-stepping acceleration `−λ(e_v − εe_p) + Ω̈_d − εė_p − k·s`.
fn backstepping_acceleration(
    errors: &TrackingErrors,
    reference_acc: &Vector4<f64>,
    params: &AbsmParams,
    reaching_gain: f64,
) -> Vector4<f64> {
    -(errors.velocity - errors.position * params.epsilon) * params.lambda + reference_acc
        - errors.position_rate * params.epsilon
        - errors.sliding * reaching_gain
}

/// ABSM control torque.
///
/// `τ_c = M̄[−λ(e_v − εe_p) + Ω̈_d − εė_p − νs] + C̄Ω̇ + N̄ + D̂ − τ̂_e − γνM̄·tanh(s/δ)`
#[allow(clippy::too_many_arguments)]
pub fn absm_control(
    errors: &TrackingErrors,
    reference_acc: &Vector4<f64>,
    nominal: &DynamicsTerms,
    omega_dot: &Vector4<f64>,
    d_hat: &Vector4<f64>,
    tau_e_est: &Vector4<f64>,
    params: &AbsmParams,
) -> Vector4<f64> {
    let acc = backstepping_acceleration(errors, reference_acc, params, params.nu);
    let switch = smoothed_switch(&errors.sliding, params.delta);
    nominal.mass * acc + nominal.bias(omega_dot) + d_hat
        - tau_e_est
        - nominal.mass * switch * (params.gamma * params.nu)
}

/// Conventional sliding-mode torque.
///
/// `τ_c = M̄[−λ(e_v − εe_p) + Ω̈_d − εė_p − s] + C̄Ω̇ + N̄ − τ̂_e − γM̄·tanh(s/δ)`
pub fn sm_control(
    errors: &TrackingErrors,
    reference_acc: &Vector4<f64>,
    nominal: &DynamicsTerms,
    omega_dot: &Vector4<f64>,
    tau_e_est: &Vector4<f64>,
    params: &AbsmParams,
) -> Vector4<f64> {
    let acc = backstepping_acceleration(errors, reference_acc, params, 1.0);
    let switch = smoothed_switch(&errors.sliding, params.delta);
    nominal.mass * acc + nominal.bias(omega_dot) - tau_e_est - nominal.mass * switch * params.gamma
}

/// Computed-torque PD: `τ_c = M̄u + C̄Ω̇ + N̄`, `u = Ω̈_d − K_D ė_p − K_P e_p`.
pub fn pd_control(
    errors: &TrackingErrors,
    reference_acc: &Vector4<f64>,
    nominal: &DynamicsTerms,
    omega_dot: &Vector4<f64>,
    params: &PdParams,
) -> Vector4<f64> {
    let u = reference_acc - errors.position_rate * params.kd - errors.position * params.kp;
    nominal.mass * u + nominal.bias(omega_dot)
}

/// Which update drives the lumped-uncertainty estimate `D̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationLaw {
    /// `D̂̇ = −η·M̄·s`: the Lyapunov-consistent law when the uncertainty
    /// weight is `M̄⁻²`. Its fast mode has natural frequency `√η`.
    #[default]
    MassNormalized,
    /// `D̂̇ = −η·M̄⁻ᵀ·s` as written. With the inertias of this arm
    /// (eigenvalues ~1e-4) its fast mode sits near `√η/λ_min(M̄)`, which needs
    /// integration steps around 1e-6 s.
    Literal,
}

impl AdaptationLaw {
    pub fn rate(self, sliding: &Vector4<f64>, nominal_mass: &Matrix4<f64>, eta: f64) -> Vector4<f64> {
        match self {
            AdaptationLaw::MassNormalized => -(nominal_mass.transpose() * sliding) * eta,
            AdaptationLaw::Literal => absm_adaptation(sliding, nominal_mass, eta),
        }
    }
}

/// `D̂̇ = −η·M̄⁻ᵀ·s`, solved through an LU factorization of M̄ᵀ.
pub fn absm_adaptation(sliding: &Vector4<f64>, nominal_mass: &Matrix4<f64>, eta: f64) -> Vector4<f64> {
    let lu = nominal_mass.transpose().lu();
    match lu.solve(sliding) {
        Some(x) => -x * eta,
        None => Vector4::from_element(f64::NAN),
    }
}

/// ABSM Lyapunov function and its quadratic upper bound on the derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    /// `V₃ = ½e_pᵀe_p + ½sᵀs + ½η⁻¹D̃ᵀD̃`
    pub v3: f64,
    /// `−EᵀΦE`, summed over the four channels.
    pub v3_dot_bound: f64,
}

pub fn lyapunov_v3_and_derivative(
    errors: &TrackingErrors,
    d_tilde: &Vector4<f64>,
    params: &AbsmParams,
) -> LyapunovSample {
    let v3 = 0.5 * errors.position.norm_squared()
        + 0.5 * errors.sliding.norm_squared()
        + 0.5 * d_tilde.norm_squared() / params.eta;
    let phi = params.phi();
    let quad: f64 = (0..4)
        .map(|i| {
            let e = nalgebra::Vector2::new(errors.position[i], errors.velocity[i]);
            e.dot(&(phi * e))
        })
        .sum();
    LyapunovSample {
        v3,
        v3_dot_bound: -quad,
    }
}

//! Samplers and oracles shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{Matrix4, Matrix6x4, SMatrix, Vector4, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softarm::dynamics::mass_matrix;
use softarm::kinematics::{actuators_to_configuration, forward_kinematics, ActuatorState};
use softarm::RobotParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Canonical configuration with curvature in [κ_min, κ_max] and torsion in
/// (−π, π), away from the wrap by `margin`.
pub fn canonical_omega(rng: &mut ChaCha8Rng, k_min: f64, k_max: f64, margin: f64) -> Vector4<f64> {
    let pi = std::f64::consts::PI;
    Vector4::new(
        rng.random_range(k_min..k_max),
        rng.random_range(-pi + margin..pi - margin),
        rng.random_range(k_min..k_max),
        rng.random_range(-pi + margin..pi - margin),
    )
}

/// Signed configuration for dynamics tests.
pub fn signed_omega(rng: &mut ChaCha8Rng, k_max: f64) -> Vector4<f64> {
    Vector4::from_fn(|i, _| {
        if i % 2 == 0 {
            rng.random_range(-k_max..k_max)
        } else {
            rng.random_range(-3.0..3.0)
        }
    })
}

pub fn uniform4(rng: &mut ChaCha8Rng, scale: f64) -> Vector4<f64> {
    Vector4::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn uniform6(rng: &mut ChaCha8Rng, scale: f64) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.random_range(-scale..scale))
}

/// Central-difference oracle for J₁ = ∂χ/∂Ω.
pub fn task_jacobian_fd(omega: &Vector4<f64>, params: &RobotParams, h: f64) -> Matrix6x4<f64> {
    let mut j = Matrix6x4::zeros();
    for k in 0..4 {
        let mut p = *omega;
        let mut m = *omega;
        p[k] += h;
        m[k] -= h;
        let d = (forward_kinematics(&p, params).task.to_vector() - forward_kinematics(&m, params).task.to_vector())
            / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}

/// Central-difference oracle for ∂(κ₁, φ₁, κ₂, φ₂)/∂(cable lengths).
pub fn actuator_jacobian_fd(q: &ActuatorState, disk_radius: f64, h: f64) -> SMatrix<f64, 4, 6> {
    let eval = |q: &ActuatorState| {
        let s = actuators_to_configuration(q, disk_radius).unwrap();
        Vector4::new(s[0].curvature, s[0].torsion, s[1].curvature, s[1].torsion)
    };
    let mut j = SMatrix::<f64, 4, 6>::zeros();
    for c in 0..6 {
        let mut p = q.lengths;
        let mut m = q.lengths;
        p[c / 3][c % 3] += h;
        m[c / 3][c % 3] -= h;
        let d = (eval(&ActuatorState { lengths: p }) - eval(&ActuatorState { lengths: m })) / (2.0 * h);
        j.set_column(c, &d);
    }
    j
}

/// Ṁ along Ω̇ by central differences of the mass matrix.
pub fn mass_rate_fd(omega: &Vector4<f64>, omega_dot: &Vector4<f64>, params: &RobotParams) -> Matrix4<f64> {
    let h = 1e-6;
    (mass_matrix(&(omega + omega_dot * h), params) - mass_matrix(&(omega - omega_dot * h), params)) / (2.0 * h)
}

/// `e(t)` of `ë + c·ė + k·e = 0` with `e(0) = e0`, `ė(0) = 0` (underdamped).
pub fn second_order_response(e0: f64, c: f64, k: f64, t: f64) -> f64 {
    let sigma = c / 2.0;
    let wd = (k - sigma * sigma).sqrt();
    e0 * (-sigma * t).exp() * ((wd * t).cos() + sigma / wd * (wd * t).sin())
}

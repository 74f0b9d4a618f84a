//! Pseudo-rigid-body Lagrangian model in configuration space.
//!
//! Each segment contributes a bending spring/inertia on ψᵢ = κᵢ·lᵢ, a
//! torsional spring/inertia on φᵢ, and a point mass lumped at its tip.
//! The gravity potential is `−Σ mᵢ·g·zᵢ`, which makes the straight
//! configuration (maximal z) the gravitational minimum: the arm hangs along
//! the gravity direction with +z pointing from base to tip.
//!
//! Standard form: `M(Ω)Ω̈ + C(Ω, Ω̇)Ω̇ + N(Ω) = τ_e + τ_c`.

use nalgebra::{Matrix3x4, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::kinematics::chain_derivatives;
use crate::params::RobotParams;

/// Generalized force `(τ_κ₁, τ_φ₁, τ_κ₂, τ_φ₂)`.
pub type GeneralizedTorque = Vector4<f64>;

/// Default central-difference step for ∂M/∂Ω.
pub const MASS_PARTIAL_STEP: f64 = 1e-6;

/// Inertia, Coriolis and conservative terms at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsTerms {
    pub mass: Matrix4<f64>,
    pub coriolis: Matrix4<f64>,
    pub conservative: Vector4<f64>,
}

impl DynamicsTerms {
    pub fn at(omega: &Vector4<f64>, omega_dot: &Vector4<f64>, params: &RobotParams) -> Self {
        Self {
            mass: mass_matrix(omega, params),
            coriolis: coriolis_matrix(omega, omega_dot, params),
            conservative: conservative_vector(omega, params),
        }
    }

    /// `C·Ω̇ + N`, the torque that holds the current motion without acceleration.
    pub fn bias(&self, omega_dot: &Vector4<f64>) -> Vector4<f64> {
        self.coriolis * omega_dot + self.conservative
    }
}

/// Positions and translational Jacobians of the lumped masses.
#[derive(Debug, Clone, Copy)]
pub struct MassPoints {
    pub positions: [Vector3<f64>; 2],
    pub jacobians: [Matrix3x4<f64>; 2],
}

/// Lumps each segment's mass at its tip frame.
pub fn mass_points(omega: &Vector4<f64>, params: &RobotParams) -> MassPoints {
    let chain = chain_derivatives(omega, params);
    MassPoints {
        positions: [chain.frames[0].translation, chain.frames[1].translation],
        jacobians: chain.tip_jacobians,
    }
}

fn pseudo_rigid_inertia(params: &RobotParams) -> Vector4<f64> {
    let [l1, l2] = params.segment_length;
    Vector4::new(
        params.bending_inertia * l1 * l1,
        params.torsional_inertia,
        params.bending_inertia * l2 * l2,
        params.torsional_inertia,
    )
}

fn elastic_stiffness(params: &RobotParams) -> Vector4<f64> {
    let [l1, l2] = params.segment_length;
    Vector4::new(
        params.bending_stiffness * l1 * l1,
        params.torsional_stiffness,
        params.bending_stiffness * l2 * l2,
        params.torsional_stiffness,
    )
}

/// `U = Σ ½k_φφᵢ² + ½k_ψψᵢ² − Σ mᵢ g zᵢ`.
pub fn potential_energy(omega: &Vector4<f64>, params: &RobotParams) -> f64 {
    let elastic = 0.5 * omega.component_mul(omega).dot(&elastic_stiffness(params));
    let points = mass_points(omega, params);
    let gravity: f64 = (0..2)
        .map(|i| params.segment_mass[i] * params.gravity * points.positions[i].z)
        .sum();
    elastic - gravity
}

/// `T = Σ ½J_φφ̇ᵢ² + ½J_ψψ̇ᵢ² + ½mᵢ‖vᵢ‖²`.
pub fn kinetic_energy(omega: &Vector4<f64>, omega_dot: &Vector4<f64>, params: &RobotParams) -> f64 {
    let rigid = 0.5 * omega_dot.component_mul(omega_dot).dot(&pseudo_rigid_inertia(params));
    let points = mass_points(omega, params);
    let translational: f64 = (0..2)
        .map(|i| 0.5 * params.segment_mass[i] * (points.jacobians[i] * omega_dot).norm_squared())
        .sum();
    rigid + translational
}

/// Hessian of the kinetic energy in Ω̇.
pub fn mass_matrix(omega: &Vector4<f64>, params: &RobotParams) -> Matrix4<f64> {
    let points = mass_points(omega, params);
    let mut m = Matrix4::from_diagonal(&pseudo_rigid_inertia(params));
    for i in 0..2 {
        let j = &points.jacobians[i];
        m += j.transpose() * j * params.segment_mass[i];
    }
    m
}

/// `∂M/∂Ω_k` for k = 0..4 by central differences with step `h`.
pub fn mass_matrix_partials(omega: &Vector4<f64>, params: &RobotParams, h: f64) -> [Matrix4<f64>; 4] {
    std::array::from_fn(|k| {
        let mut plus = *omega;
        let mut minus = *omega;
        plus[k] += h;
        minus[k] -= h;
        (mass_matrix(&plus, params) - mass_matrix(&minus, params)) / (2.0 * h)
    })
}

/// Coriolis matrix from Christoffel symbols of the first kind, with the
/// mass-matrix partials taken at step `h`.
pub fn coriolis_matrix_with_step(
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    params: &RobotParams,
    h: f64,
) -> Matrix4<f64> {
    let dm = mass_matrix_partials(omega, params, h);
    let mut c = Matrix4::zeros();
    for k in 0..4 {
        for j in 0..4 {
            let mut acc = 0.0;
            for m in 0..4 {
                acc += 0.5 * (dm[m][(k, j)] + dm[j][(k, m)] - dm[k][(m, j)]) * omega_dot[m];
            }
            c[(k, j)] = acc;
        }
    }
    c
}

pub fn coriolis_matrix(omega: &Vector4<f64>, omega_dot: &Vector4<f64>, params: &RobotParams) -> Matrix4<f64> {
    coriolis_matrix_with_step(omega, omega_dot, params, MASS_PARTIAL_STEP)
}

/// `N = ∂U/∂Ω`: elastic terms plus gravity propagated through the mass-point
/// Jacobians.
pub fn conservative_vector(omega: &Vector4<f64>, params: &RobotParams) -> Vector4<f64> {
    let mut n = elastic_stiffness(params).component_mul(omega);
    let points = mass_points(omega, params);
    for i in 0..2 {
        let dz = points.jacobians[i].row(2).transpose();
        n -= dz * (params.segment_mass[i] * params.gravity);
    }
    n
}

/// Ω̈ = M⁻¹(τ_c + τ_e − CΩ̇ − N) through a Cholesky solve.
pub fn forward_dynamics(
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    tau_c: &GeneralizedTorque,
    tau_e: &GeneralizedTorque,
    params: &RobotParams,
) -> Result<Vector4<f64>> {
    let finite = |v: &Vector4<f64>| v.iter().all(|x| x.is_finite());
    if !(finite(omega) && finite(omega_dot) && finite(tau_c) && finite(tau_e)) {
        return Err(Error::domain("forward dynamics received a non-finite input"));
    }
    let terms = DynamicsTerms::at(omega, omega_dot, params);
    solve_acceleration(&terms, omega_dot, &(tau_c + tau_e))
}

/// Solves `M·Ω̈ = τ − CΩ̇ − N` for precomputed terms.
pub fn solve_acceleration(
    terms: &DynamicsTerms,
    omega_dot: &Vector4<f64>,
    tau: &Vector4<f64>,
) -> Result<Vector4<f64>> {
    let chol = terms
        .mass
        .cholesky()
        .ok_or_else(|| Error::domain("mass matrix is not positive definite"))?;
    Ok(chol.solve(&(tau - terms.bias(omega_dot))))
}

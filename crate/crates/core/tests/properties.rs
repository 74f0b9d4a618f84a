//! Randomized invariants of the model, controller and impedance layers.

mod common;

use nalgebra::{Matrix6, Matrix6x4, Vector4, Vector6};
use proptest::prelude::*;
use softarm::controllers::{compute_errors, AbsmParams, Reference};
use softarm::dynamics::{
    conservative_vector, coriolis_matrix, forward_dynamics, kinetic_energy, mass_matrix, potential_energy,
    DynamicsTerms,
};
use softarm::estimator::ResidualEstimator;
use softarm::impedance::{
    check_stability, lyapunov_certificate, map_to_configuration, select_alpha, symmetric_eigenvalues, time_grid,
    ImpedanceProfile, ProfileSample,
};
use softarm::kinematics::{
    actuators_to_configuration, canonical_configuration, cable_lengths, jacobian_actuator_to_config,
    jacobian_config_to_task,
};
use softarm::RobotParams;

fn params() -> RobotParams {
    RobotParams::default()
}

prop_compose! {
    fn canonical()(k1 in 1e-3f64..10.0, p1 in -3.1f64..3.1, k2 in 1e-3f64..10.0, p2 in -3.1f64..3.1) -> Vector4<f64> {
        Vector4::new(k1, p1, k2, p2)
    }
}

prop_compose! {
    fn signed()(k1 in -8.0f64..8.0, p1 in -3.0f64..3.0, k2 in -8.0f64..8.0, p2 in -3.0f64..3.0) -> Vector4<f64> {
        Vector4::new(k1, p1, k2, p2)
    }
}

prop_compose! {
    fn vec4(scale: f64)(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) -> Vector4<f64> {
        Vector4::new(a, b, c, d) * scale
    }
}

prop_compose! {
    fn vec6(scale: f64)(v in proptest::array::uniform6(-1.0f64..1.0)) -> Vector6<f64> {
        Vector6::from_row_slice(&v) * scale
    }
}

fn spd6(seed: [f64; 36], floor: f64) -> Matrix6<f64> {
    let a = Matrix6::from_row_slice(&seed);
    a * a.transpose() + Matrix6::identity() * floor
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn configuration_actuator_round_trip(omega in canonical()) {
        let p = params();
        let q = cable_lengths(&omega, &p).unwrap();
        let segs = actuators_to_configuration(&q, p.disk_radius).unwrap();
        let back = Vector4::new(segs[0].curvature, segs[0].torsion, segs[1].curvature, segs[1].torsion);
        prop_assert!((back - omega).amax() < 1e-9, "{omega:?} → {back:?}");
        prop_assert!((segs[0].length - p.segment_length[0]).abs() < 1e-12);
        let q2 = cable_lengths(&back, &p).unwrap();
        for s in 0..2 {
            for c in 0..3 {
                prop_assert!((q2.lengths[s][c] - q.lengths[s][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_curvature_maps_to_canonical_twin(omega in signed()) {
        let p = params();
        let q = cable_lengths(&omega, &p).unwrap();
        let segs = actuators_to_configuration(&q, p.disk_radius).unwrap();
        let canon = canonical_configuration(&omega);
        prop_assert!((segs[0].curvature - canon[0]).abs() < 1e-9);
        prop_assert!((segs[1].curvature - canon[2]).abs() < 1e-9);
    }

    #[test]
    fn task_jacobian_matches_finite_differences(omega in signed()) {
        let p = params();
        let j = jacobian_config_to_task(&omega, &p);
        let fd = common::task_jacobian_fd(&omega, &p, 1e-6);
        prop_assert!((j - fd).norm() <= 1e-6 * j.norm().max(1e-3), "{}", (j - fd).norm());
    }

    #[test]
    fn actuator_jacobian_matches_finite_differences(omega in canonical()) {
        prop_assume!(omega[0] > 0.05 && omega[2] > 0.05);
        let p = params();
        let q = cable_lengths(&omega, &p).unwrap();
        let j = jacobian_actuator_to_config(&q, p.disk_radius).unwrap();
        let fd = common::actuator_jacobian_fd(&q, p.disk_radius, 1e-9);
        prop_assert!((j.matrix - fd).norm() <= 1e-5 * j.matrix.norm());
    }

    #[test]
    fn mass_matrix_is_spd(omega in signed()) {
        let m = mass_matrix(&omega, &params());
        prop_assert!((m - m.transpose()).amax() < 1e-15);
        prop_assert!(m.cholesky().is_some());
    }

    #[test]
    fn kinetic_energy_is_mass_quadratic_form(omega in signed(), v in vec4(3.0)) {
        let p = params();
        let t = kinetic_energy(&omega, &v, &p);
        let q = 0.5 * v.dot(&(mass_matrix(&omega, &p) * v));
        prop_assert!((t - q).abs() <= 1e-12 * q.abs().max(1e-12));
    }

    #[test]
    fn conservative_vector_is_potential_gradient(omega in signed()) {
        let p = params();
        let n = conservative_vector(&omega, &p);
        let h = 1e-6;
        for k in 0..4 {
            let mut a = omega;
            let mut b = omega;
            a[k] += h;
            b[k] -= h;
            let fd = (potential_energy(&a, &p) - potential_energy(&b, &p)) / (2.0 * h);
            prop_assert!((fd - n[k]).abs() <= 1e-6 * n.amax().max(1e-3));
        }
    }

    #[test]
    fn mass_rate_minus_twice_coriolis_is_skew(omega in signed(), v in vec4(3.0), w in vec4(1.0)) {
        let p = params();
        let n = common::mass_rate_fd(&omega, &v, &p) - coriolis_matrix(&omega, &v, &p) * 2.0;
        prop_assert!(w.dot(&(n * w)).abs() < 1e-8);
    }

    #[test]
    fn forward_dynamics_inverts_the_model(omega in signed(), v in vec4(2.0), tau in vec4(0.2), load in vec4(0.1)) {
        let p = params();
        let acc = forward_dynamics(&omega, &v, &tau, &load, &p).unwrap();
        let terms = DynamicsTerms::at(&omega, &v, &p);
        let lhs = terms.mass * acc + terms.bias(&v);
        prop_assert!((lhs - tau - load).amax() < 1e-10);
    }

    #[test]
    fn sliding_identity(omega in signed(), v in vec4(1.0), r in signed(), rv in vec4(1.0)) {
        let prm = AbsmParams::default();
        let reference = Reference { omega: r, omega_dot: rv, omega_ddot: Vector4::zeros() };
        let e = compute_errors(&omega, &v, &reference, &prm);
        let resid = e.sliding - e.position * prm.lambda - e.position_rate - e.position * prm.epsilon;
        prop_assert!(resid.amax() < 1e-12);
    }

    #[test]
    fn mapped_impedance_is_congruent(omega in signed(), m in proptest::array::uniform32(-1.0f64..1.0),
                                     k in proptest::array::uniform32(-1.0f64..1.0), f in vec6(5.0)) {
        let mut ms = [0.0; 36];
        let mut ks = [0.0; 36];
        ms[..32].copy_from_slice(&m);
        ks[..32].copy_from_slice(&k);
        let sample = ProfileSample {
            inertia: spd6(ms, 1.0),
            inertia_rate: Matrix6::zeros(),
            inertia_accel: Matrix6::zeros(),
            damping: spd6(ks, 2.0),
            damping_rate: Matrix6::zeros(),
            stiffness: spd6(ks, 3.0),
            stiffness_rate: Matrix6::zeros(),
        };
        let j = jacobian_config_to_task(&omega, &params());
        let c = map_to_configuration(&sample, &j, &Matrix6x4::zeros(), &f);
        let scale = c.inertia.amax().max(c.stiffness.amax());
        prop_assert!((c.inertia - c.inertia.transpose()).amax() <= 1e-12 * scale.max(1.0));
        prop_assert!((c.stiffness - c.stiffness.transpose()).amax() <= 1e-12 * scale.max(1.0));
        for mat in [c.inertia, c.stiffness] {
            let eig = mat.symmetric_eigenvalues();
            prop_assert!(eig.min() >= -1e-12 * scale.max(1.0));
        }
        prop_assert!((c.load - j.transpose() * f).amax() < 1e-12);
    }

    #[test]
    fn impedance_lyapunov_function_is_positive(xi in vec6(1.0), xd in vec6(1.0), t in 0.0f64..10.0) {
        prop_assume!(xi.norm() + xd.norm() > 1e-6);
        let p = ImpedanceProfile::variable();
        let l = lyapunov_certificate(&xi, &xd, &p, 2.5, t).unwrap();
        prop_assert!(l.v > 0.0);
    }

    #[test]
    fn estimator_identity_holds_for_any_drive(omega in signed(), v in vec4(1.0), tau in vec4(0.2)) {
        let p = params();
        let mut est = ResidualEstimator::new(&Vector4::zeros(), &Vector4::zeros(), &p, 100.0).unwrap();
        for _ in 0..5 {
            let r = est.update(&omega, &v, &tau, 1e-3, &p).unwrap();
            prop_assert!((est.defining_identity() - r).amax() <= 1e-9 * r.amax().max(1.0));
        }
    }
}

#[test]
fn eigensolver_matches_known_spectrum() {
    let q = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
    let mut rot = Matrix6::identity();
    rot.fixed_view_mut::<3, 3>(0, 0).copy_from(&q);
    rot.fixed_view_mut::<3, 3>(3, 3).copy_from(&q.transpose());
    let d = Matrix6::from_diagonal(&Vector6::new(-2.0, 0.5, 1.0, 3.0, 7.0, 11.0));
    let m = rot * d * rot.transpose();
    let e = symmetric_eigenvalues(&m);
    let expected = [-2.0, 0.5, 1.0, 3.0, 7.0, 11.0];
    for (a, b) in e.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn certified_alpha_is_safe_downward_within_feasible_set() {
    // Invariable profile: the feasible set is (0, 4/3].
    let grid = time_grid(1.0, 0.05).unwrap();
    let p = ImpedanceProfile::invariable();
    let a = select_alpha(&p, &grid).unwrap();
    for i in 1..=50 {
        let ai = a * i as f64 / 50.0;
        assert!(check_stability(&p, ai, &grid).unwrap().pass, "α = {ai}");
    }
    // Variable profile: stiffness growth must be absorbed by 2αK_d, so the
    // feasible set is bounded below as well; every α between the lower edge
    // and the certified value passes.
    let grid = time_grid(10.0, 1e-2).unwrap();
    let p = ImpedanceProfile::variable();
    let a = select_alpha(&p, &grid).unwrap();
    for i in 0..=40 {
        let ai = 0.9 + (a - 0.9) * i as f64 / 40.0;
        assert!(check_stability(&p, ai, &grid).unwrap().pass, "α = {ai}");
    }
    assert!(!check_stability(&p, 0.5, &grid).unwrap().pass);
}

//! Closed-loop simulation.
//!
//! The whole loop is one ODE over the stacked state
//! `(Ω, Ω̇, D̂, Ω_r, Ω̇_r, I)`: plant configuration and rate, lumped-uncertainty
//! estimate, compliant reference, and the running integral of the load
//! estimator. It is integrated with fixed-step RK4. At every stage the
//! right-hand side is evaluated in this order:
//!
//! 1. read the plant state `(Ω, Ω̇)`;
//! 2. estimator residual `r = K_I(M̄Ω̇ − P₀ − I)`;
//! 3. admittance acceleration of the compliant reference, driven by `r`;
//! 4. control torque against the reference;
//! 5. adaptation rate;
//! 6. plant acceleration under the true parameters and the applied wrench.
//!
//! The external wrench is sampled at the start of each step and held over it;
//! pulse edges on the step grid are therefore reproduced exactly. The plant
//! uses the perturbed parameters, while the controllers and the estimator use
//! the nominal ones.

use nalgebra::{SVector, Vector4, Vector6};

use super::integrator::rk4_step;
use super::metrics::{iae, ise, itae, rmse, MetricsSummary};
use super::scenario::{force_at, ControllerKind, Scenario};
use crate::controllers::{
    absm_control, compute_errors, lyapunov_v3_and_derivative, pd_control, sm_control, Reference,
};
use crate::dynamics::{conservative_vector, mass_matrix, solve_acceleration, DynamicsTerms};
use crate::error::{Error, Result};
use crate::estimator::ResidualEstimator;
use crate::impedance::{
    admittance_acceleration, eval_profile, map_to_configuration, select_alpha, time_grid, ImpedanceProfile,
    DEFAULT_GRID_STEP,
};
use crate::kinematics::{cable_lengths, forward_kinematics, jacobian_config_to_task, jacobian_config_to_task_rate};
use crate::params::RobotParams;

type State = SVector<f64, 24>;

/// Unpacked view of the stacked state.
#[derive(Debug, Clone, Copy)]
struct LoopState {
    omega: Vector4<f64>,
    omega_dot: Vector4<f64>,
    d_hat: Vector4<f64>,
    ref_omega: Vector4<f64>,
    ref_omega_dot: Vector4<f64>,
    integral: Vector4<f64>,
}

impl LoopState {
    fn unpack(x: &State) -> Self {
        let part = |i: usize| -> Vector4<f64> { x.fixed_rows::<4>(4 * i).into_owned() };
        Self {
            omega: part(0),
            omega_dot: part(1),
            d_hat: part(2),
            ref_omega: part(3),
            ref_omega_dot: part(4),
            integral: part(5),
        }
    }

    fn pack(parts: [&Vector4<f64>; 6]) -> State {
        let mut x = State::zeros();
        for (i, p) in parts.iter().enumerate() {
            x.fixed_rows_mut::<4>(4 * i).copy_from(*p);
        }
        x
    }
}

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub omega: Vector4<f64>,
    pub omega_dot: Vector4<f64>,
    /// Tracking error against the (compliant) reference.
    pub position_error: Vector4<f64>,
    pub sliding: Vector4<f64>,
    pub control: Vector4<f64>,
    pub residual: Vector4<f64>,
    /// `−EᵀΦE`, the ABSM Lyapunov rate bound.
    pub v3_dot_bound: f64,
    pub cables: [f64; 6],
    /// `χ(Ω) − χ(Ω_d)` (position, then rotation vector).
    pub task_error: Vector6<f64>,
    /// Compliant reference tracked by the controller.
    pub reference: Vector4<f64>,
    /// Generalized external load `J₁ᵀF_ext` actually applied to the plant.
    pub external_load: Vector4<f64>,
    pub d_hat: Vector4<f64>,
}

impl StepRecord {
    /// `‖(e_κ₁, e_κ₂)‖`
    pub fn curvature_error(&self) -> f64 {
        self.position_error[0].hypot(self.position_error[2])
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub records: Vec<StepRecord>,
    pub metrics: MetricsSummary,
    /// Certified impedance rate constant, when the admittance loop is active.
    pub alpha: Option<f64>,
    pub plant: RobotParams,
}

fn control_torque(
    scenario: &Scenario,
    state: &LoopState,
    reference: &Reference,
    load_estimate: &Vector4<f64>,
    nominal: &DynamicsTerms,
) -> (Vector4<f64>, Vector4<f64>) {
    let errors = compute_errors(&state.omega, &state.omega_dot, reference, &scenario.absm);
    match scenario.controller {
        ControllerKind::Absm => {
            let tau = absm_control(
                &errors,
                &reference.omega_ddot,
                nominal,
                &state.omega_dot,
                &state.d_hat,
                load_estimate,
                &scenario.absm,
            );
            let rate = scenario.adaptation.rate(&errors.sliding, &nominal.mass, scenario.absm.eta);
            (tau, rate)
        }
        ControllerKind::Sm => (
            sm_control(
                &errors,
                &reference.omega_ddot,
                nominal,
                &state.omega_dot,
                load_estimate,
                &scenario.absm,
            ),
            Vector4::zeros(),
        ),
        ControllerKind::Pd => (
            pd_control(&errors, &reference.omega_ddot, nominal, &state.omega_dot, &scenario.pd),
            Vector4::zeros(),
        ),
        ControllerKind::None => (Vector4::zeros(), Vector4::zeros()),
    }
}

/// Certifies the profile over the scenario horizon and returns its α.
pub fn certified_alpha(profile: &ImpedanceProfile, horizon: f64) -> Result<f64> {
    match profile.alpha {
        Some(a) => Ok(a),
        None => select_alpha(profile, &time_grid(horizon, DEFAULT_GRID_STEP)?),
    }
}

/// Everything the right-hand side needs besides the state.
struct ClosedLoop<'a> {
    scenario: &'a Scenario,
    nominal: RobotParams,
    plant: RobotParams,
    estimator_model: RobotParams,
    estimator: ResidualEstimator,
    profile: Option<(ImpedanceProfile, f64)>,
    target: Vector4<f64>,
}

/// Quantities computed while evaluating the right-hand side.
struct Evaluation {
    derivative: State,
    reference: Reference,
    residual: Vector4<f64>,
    control: Vector4<f64>,
    applied_load: Vector4<f64>,
}

impl ClosedLoop<'_> {
    fn evaluate(&self, t: f64, x: &State, wrench: &Vector6<f64>) -> Result<Evaluation> {
        let s = LoopState::unpack(x);
        let momentum = mass_matrix(&s.omega, &self.estimator_model) * s.omega_dot;
        let residual = self.estimator.residual_for(&momentum, &s.integral);
        let applied_load = jacobian_config_to_task(&s.omega, &self.plant).transpose() * wrench;
        let load_estimate = if self.scenario.feed_ground_truth_load {
            applied_load
        } else {
            residual
        };

        let ref_acc = match &self.profile {
            Some((profile, alpha)) => {
                let sample = eval_profile(profile, *alpha, t)?;
                let j1 = jacobian_config_to_task(&s.omega, &self.nominal);
                let j1_dot = jacobian_config_to_task_rate(&s.omega, &s.omega_dot, &self.nominal);
                let mut imp = map_to_configuration(&sample, &j1, &j1_dot, &Vector6::zeros());
                imp.load = load_estimate;
                let imp = imp.regularized(&self.scenario.admittance);
                admittance_acceleration(&imp, &s.ref_omega, &s.ref_omega_dot, &self.target)?
            }
            None => Vector4::zeros(),
        };
        let reference = Reference {
            omega: s.ref_omega,
            omega_dot: s.ref_omega_dot,
            omega_ddot: ref_acc,
        };

        let nominal_terms = DynamicsTerms::at(&s.omega, &s.omega_dot, &self.nominal);
        let (control, d_rate) = control_torque(self.scenario, &s, &reference, &load_estimate, &nominal_terms);
        let integral_rate = control - conservative_vector(&s.omega, &self.estimator_model) + residual;
        let plant_terms = DynamicsTerms::at(&s.omega, &s.omega_dot, &self.plant);
        let acc = solve_acceleration(&plant_terms, &s.omega_dot, &(control + applied_load))?;
        Ok(Evaluation {
            derivative: LoopState::pack([&s.omega_dot, &acc, &d_rate, &s.ref_omega_dot, &ref_acc, &integral_rate]),
            reference,
            residual,
            control,
            applied_load,
        })
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<SimulationResult> {
    scenario.validate()?;
    let nominal = scenario.robot;
    let plant = scenario.plant_params()?;
    let estimator_model = if scenario.estimator_uses_plant_model { plant } else { nominal };
    let dt = scenario.dt;
    let steps = scenario.steps();
    let target = scenario.target();
    let target_pose = forward_kinematics(&target, &nominal).task.to_vector();

    let profile = match scenario.profile() {
        Some(p) => {
            let a = certified_alpha(&p, scenario.duration)?;
            Some((p, a))
        }
        None => None,
    };
    let alpha = profile.as_ref().map(|(_, a)| *a);

    let (omega0, omega_dot0) = scenario.initial_state();
    let estimator = ResidualEstimator::new(&omega0, &omega_dot0, &estimator_model, scenario.estimator_gain)?;
    let lp = ClosedLoop {
        scenario,
        nominal,
        plant,
        estimator_model,
        estimator,
        profile,
        target,
    };
    let zero = Vector4::zeros();
    let mut x = LoopState::pack([&omega0, &omega_dot0, &zero, &target, &zero, &zero]);
    let mut records = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = k as f64 * dt;
        let wrap = |e: Error| match e {
            Error::Simulation { .. } => e,
            other => Error::Simulation {
                time: t,
                reason: other.to_string(),
            },
        };
        let wrench = force_at(&scenario.force_schedule, t);
        let s = LoopState::unpack(&x);
        let ev = lp.evaluate(t, &x, &wrench).map_err(wrap)?;
        let errors = compute_errors(&s.omega, &s.omega_dot, &ev.reference, &scenario.absm);
        let lyap = lyapunov_v3_and_derivative(&errors, &zero, &scenario.absm);
        let cables = cable_lengths(&s.omega, &nominal).map_err(wrap)?.as_array();
        let pose = forward_kinematics(&s.omega, &nominal).task.to_vector();
        records.push(StepRecord {
            time: t,
            omega: s.omega,
            omega_dot: s.omega_dot,
            position_error: errors.position,
            sliding: errors.sliding,
            control: ev.control,
            residual: ev.residual,
            v3_dot_bound: lyap.v3_dot_bound,
            cables,
            task_error: pose - target_pose,
            reference: s.ref_omega,
            external_load: ev.applied_load,
            d_hat: s.d_hat,
        });
        if k == steps {
            break;
        }
        x = rk4_step(&x, t, dt, |ts, xs| {
            lp.evaluate(ts, xs, &wrench).map(|e| e.derivative).map_err(|e| match e {
                Error::Simulation { .. } => e,
                other => Error::Simulation {
                    time: ts,
                    reason: other.to_string(),
                },
            })
        })?;
    }

    let metrics = summarize(scenario, &records, alpha)?;
    Ok(SimulationResult {
        records,
        metrics,
        alpha,
        plant,
    })
}

pub fn summarize(scenario: &Scenario, records: &[StepRecord], alpha: Option<f64>) -> Result<MetricsSummary> {
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let curvature: Vec<f64> = records.iter().map(StepRecord::curvature_error).collect();
    let mut coord_rmse = [0.0; 4];
    for (i, slot) in coord_rmse.iter_mut().enumerate() {
        let e: Vec<f64> = records.iter().map(|r| r.position_error[i]).collect();
        *slot = rmse(&times, &e)?;
    }
    Ok(MetricsSummary {
        scenario_id: scenario.id.clone(),
        controller: scenario.controller.name().to_string(),
        rmse: coord_rmse,
        iae: iae(&times, &curvature)?,
        itae: itae(&times, &curvature)?,
        ise: ise(&times, &curvature)?,
        max_curvature_error: curvature.iter().copied().fold(0.0, f64::max),
        alpha,
    })
}

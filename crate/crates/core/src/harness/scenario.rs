//! Scenario description and the external-force schedule.

use std::path::PathBuf;

use nalgebra::{Vector4, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{AbsmParams, AdaptationLaw, PdParams};
use crate::error::{Error, Result};
use crate::estimator::DEFAULT_GAIN;
use crate::impedance::{AdmittanceSettings, ImpedanceProfile};
use crate::params::RobotParams;

/// Version of the scenario file format understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Absm,
    Sm,
    Pd,
    /// Zero control torque (passive arm).
    None,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Absm => "ABSM",
            ControllerKind::Sm => "SM",
            ControllerKind::Pd => "PD",
            ControllerKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ImpedanceMode {
    #[default]
    Variable,
    Invariable,
    Off,
}

impl ImpedanceMode {
    pub fn profile(self) -> Option<ImpedanceProfile> {
        match self {
            ImpedanceMode::Variable => Some(ImpedanceProfile::variable()),
            ImpedanceMode::Invariable => Some(ImpedanceProfile::invariable()),
            ImpedanceMode::Off => None,
        }
    }
}

/// How the plant parameters deviate from the nominal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    /// Every mass, stiffness and inertia scaled by `1 + fraction`.
    #[default]
    Scaled,
    /// Each of those parameters scaled by an independent factor drawn
    /// uniformly from `[1 − fraction, 1 + fraction]` with the scenario seed.
    Random,
}

/// Rectangular wrench pulse active on `[start, end)`, applied at the tip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcePulse {
    pub start: f64,
    pub end: f64,
    /// `(F_x, F_y, F_z, M_x, M_y, M_z)` in the base frame (N, N·m).
    pub wrench: [f64; 6],
}

/// Sum of the pulses active at `t`.
pub fn force_at(schedule: &[ForcePulse], t: f64) -> Vector6<f64> {
    schedule
        .iter()
        .filter(|p| p.start <= t && t < p.end)
        .fold(Vector6::zeros(), |acc, p| acc + Vector6::from_row_slice(&p.wrench))
}

/// Three tip-force pulses inside [2 s, 8 s].
///
/// At the straight pose a tip force `F_x` maps to curvature torques
/// `(l₁²/2 + l₁l₂, l₂²/2)·F_x = (0.03375, 0.01125)·F_x`; the amplitudes put the
/// first-segment curvature torque at about 0.12 N·m for the first two pulses.
pub fn default_force_schedule() -> Vec<ForcePulse> {
    vec![
        ForcePulse {
            start: 2.0,
            end: 3.0,
            wrench: [3.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        },
        ForcePulse {
            start: 4.0,
            end: 5.0,
            wrench: [-3.5, 0.0, 0.0, 0.0, 0.0, 0.0],
        },
        ForcePulse {
            start: 6.0,
            end: 7.5,
            wrench: [2.5, 2.5, 0.0, 0.0, 0.0, 0.0],
        },
    ]
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// One closed-loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub id: String,
    pub duration: f64,
    pub dt: f64,
    pub controller: ControllerKind,
    pub impedance_mode: ImpedanceMode,
    /// Overrides the profile selected by `impedance_mode` when present.
    pub impedance_profile: Option<ImpedanceProfile>,
    pub admittance: AdmittanceSettings,
    pub uncertainty_fraction: f64,
    pub uncertainty_mode: UncertaintyMode,
    pub initial_omega: [f64; 4],
    pub initial_omega_dot: [f64; 4],
    pub target_omega: [f64; 4],
    pub force_schedule: Vec<ForcePulse>,
    pub estimator_gain: f64,
    /// Feed the true `J₁ᵀF_ext` to the controllers and admittance instead of
    /// the estimator residual.
    pub feed_ground_truth_load: bool,
    /// Run the estimator on the true plant model instead of the nominal one.
    pub estimator_uses_plant_model: bool,
    pub robot: RobotParams,
    pub absm: AbsmParams,
    pub pd: PdParams,
    pub adaptation: AdaptationLaw,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id: "default".into(),
            duration: 10.0,
            dt: 1e-3,
            controller: ControllerKind::Absm,
            impedance_mode: ImpedanceMode::Variable,
            impedance_profile: None,
            admittance: AdmittanceSettings::default(),
            uncertainty_fraction: 0.1,
            uncertainty_mode: UncertaintyMode::Scaled,
            initial_omega: [0.02, -0.01, 0.01, -0.03],
            initial_omega_dot: [0.0; 4],
            target_omega: [0.0; 4],
            force_schedule: default_force_schedule(),
            estimator_gain: DEFAULT_GAIN,
            feed_ground_truth_load: false,
            estimator_uses_plant_model: false,
            robot: RobotParams::default(),
            absm: AbsmParams::default(),
            pd: PdParams::default(),
            adaptation: AdaptationLaw::default(),
            seed: 0,
            output_dir: None,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::config(format!("scenario JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::config(format!(
                "duration must be at least dt, got {} < {}",
                self.duration, self.dt
            )));
        }
        if !(self.estimator_gain.is_finite() && self.estimator_gain > 0.0) {
            return Err(Error::config(format!(
                "estimator_gain must be positive, got {}",
                self.estimator_gain
            )));
        }
        if self.estimator_gain * self.dt > 1.0 {
            return Err(Error::config(format!(
                "estimator_gain·dt = {} exceeds 1",
                self.estimator_gain * self.dt
            )));
        }
        if !(0.0..1.0).contains(&self.uncertainty_fraction) {
            return Err(Error::config(format!(
                "uncertainty_fraction must lie in [0, 1), got {}",
                self.uncertainty_fraction
            )));
        }
        let finite4 = |v: &[f64; 4]| v.iter().all(|x| x.is_finite());
        if !(finite4(&self.initial_omega) && finite4(&self.initial_omega_dot) && finite4(&self.target_omega)) {
            return Err(Error::config("initial and target states must be finite"));
        }
        for (i, p) in self.force_schedule.iter().enumerate() {
            let ok = p.start.is_finite()
                && p.end.is_finite()
                && 0.0 <= p.start
                && p.start < p.end
                && p.end <= self.duration
                && p.wrench.iter().all(|w| w.is_finite());
            if !ok {
                return Err(Error::config(format!(
                    "force pulse {i} must satisfy 0 ≤ start < end ≤ duration with a finite wrench"
                )));
            }
        }
        if let Some(p) = &self.impedance_profile {
            p.validate()?;
        }
        self.admittance.validate()?;
        self.robot.validate().map_err(|e| Error::config(e.to_string()))?;
        self.absm.validate().map_err(|e| Error::config(e.to_string()))?;
        self.pd.validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }

    /// Number of integration steps; `duration` is rounded to the step grid.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn profile(&self) -> Option<ImpedanceProfile> {
        match self.impedance_mode {
            ImpedanceMode::Off => None,
            _ => self.impedance_profile.clone().or_else(|| self.impedance_mode.profile()),
        }
    }

    /// Parameters of the simulated plant.
    pub fn plant_params(&self) -> Result<RobotParams> {
        match self.uncertainty_mode {
            UncertaintyMode::Scaled => self.robot.perturb(self.uncertainty_fraction),
            UncertaintyMode::Random => {
                let f = self.uncertainty_fraction;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut draw = || 1.0 + if f > 0.0 { rng.random_range(-f..=f) } else { 0.0 };
                let mut p = self.robot;
                p.segment_mass[0] *= draw();
                p.segment_mass[1] *= draw();
                p.bending_stiffness *= draw();
                p.torsional_stiffness *= draw();
                p.bending_inertia *= draw();
                p.torsional_inertia *= draw();
                p.validate()?;
                Ok(p)
            }
        }
    }

    pub fn initial_state(&self) -> (Vector4<f64>, Vector4<f64>) {
        (
            Vector4::from_row_slice(&self.initial_omega),
            Vector4::from_row_slice(&self.initial_omega_dot),
        )
    }

    pub fn target(&self) -> Vector4<f64> {
        Vector4::from_row_slice(&self.target_omega)
    }
}

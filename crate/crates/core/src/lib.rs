//! Simulation and control of a two-segment, cable-driven modular soft
//! manipulator.
//!
//! The crate is organized bottom-up:
//!
//! * [`kinematics`]: cable ↔ curvature ↔ pose maps and their Jacobians;
//! * [`dynamics`]: pseudo-rigid-body Lagrangian terms `M`, `C`, `N`;
//! * [`controllers`]: adaptive back-stepping sliding mode (ABSM), sliding mode
//!   and computed-torque PD laws;
//! * [`impedance`]: time-varying impedance profiles, their stability
//!   certificate, and the task → configuration admittance reference;
//! * [`estimator`]: generalized-momentum residual for external loads;
//! * [`harness`]: scenarios, closed-loop integration, metrics and the CLI.

pub mod controllers;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod impedance;
pub mod kinematics;
pub mod params;

pub use error::{Error, Result};
pub use params::{perturb_params, RobotParams};

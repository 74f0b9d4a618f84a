//! Scenario files, closed-loop integration, metrics and outputs.

pub mod cli;
pub mod experiments;
pub mod integrator;
pub mod metrics;
pub mod output;
pub mod scenario;
pub mod simulation;

pub use integrator::rk4_step;
pub use metrics::MetricsSummary;
pub use scenario::{default_force_schedule, force_at, ControllerKind, ForcePulse, ImpedanceMode, Scenario};
pub use simulation::{run_scenario, SimulationResult, StepRecord};

//! Command-line front end.
//!
//! Errors are reported as one JSON object on stderr:
//! `{"error": "<kind>", "message": "..."}`. Malformed input files exit with
//! status 2, every other failure with status 1.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector4;
use serde::Serialize;

use super::experiments::{compare_controllers, estimator_step_response};
use super::output::{write_csv, write_json};
use super::scenario::{ControllerKind, ImpedanceMode, Scenario};
use super::simulation::run_scenario;
use crate::error::{Error, Result};
use crate::impedance::{check_stability, select_alpha, time_grid, ImpedanceProfile, DEFAULT_GRID_STEP};
use crate::params::RobotParams;

#[derive(Debug, Parser)]
#[command(name = "softarm", version, about = "Two-segment soft manipulator simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write `<id>.csv` and `<id>_metrics.json`.
    Simulate(RunArgs),
    /// Run ABSM, SM and PD on the same scenario and write `comparison.json`.
    Compare(RunArgs),
    /// Certify an impedance profile and print the stability report.
    CheckImpedance(CheckArgs),
    /// Estimator response to a step load on a static arm, for several gains.
    EstimateDemo(DemoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ControllerArg {
    Absm,
    Sm,
    Pd,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ImpedanceArg {
    Variable,
    Invariable,
    Off,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON; defaults are used when omitted.
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long, value_enum)]
    pub controller: Option<ControllerArg>,
    #[arg(long, value_enum)]
    pub impedance: Option<ImpedanceArg>,
    /// Parametric uncertainty fraction.
    #[arg(long)]
    pub pu: Option<f64>,
    /// Estimator gain K_I.
    #[arg(long)]
    pub ki: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Profile JSON; the variable profile is used when omitted.
    pub profile: Option<PathBuf>,
    /// Certification horizon (s).
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    /// Include every grid sample in the report.
    #[arg(long)]
    pub samples: bool,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0, 1000.0])]
    pub ki: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.1)]
    pub duration: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Failure surfaced to the process exit status.
#[derive(Debug)]
pub struct CliFailure {
    pub status: i32,
    pub error: Error,
}

impl From<Error> for CliFailure {
    fn from(error: Error) -> Self {
        let status = if matches!(error, Error::Config(_)) { 2 } else { 1 };
        Self { status, error }
    }
}

impl CliFailure {
    pub fn to_json(&self) -> String {
        serde_json::json!({"error": self.error.kind(), "message": self.error.to_string()}).to_string()
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn load_scenario(args: &RunArgs) -> Result<Scenario> {
    let mut s = match &args.scenario {
        Some(p) => Scenario::from_json(&read_file(p)?)?,
        None => Scenario::default(),
    };
    if let Some(v) = args.dt {
        s.dt = v;
    }
    if let Some(v) = args.duration {
        s.duration = v;
        s.force_schedule.retain(|p| p.end <= v);
    }
    if let Some(c) = args.controller {
        s.controller = match c {
            ControllerArg::Absm => ControllerKind::Absm,
            ControllerArg::Sm => ControllerKind::Sm,
            ControllerArg::Pd => ControllerKind::Pd,
            ControllerArg::None => ControllerKind::None,
        };
    }
    if let Some(m) = args.impedance {
        s.impedance_mode = match m {
            ImpedanceArg::Variable => ImpedanceMode::Variable,
            ImpedanceArg::Invariable => ImpedanceMode::Invariable,
            ImpedanceArg::Off => ImpedanceMode::Off,
        };
    }
    if let Some(v) = args.pu {
        s.uncertainty_fraction = v;
    }
    if let Some(v) = args.ki {
        s.estimator_gain = v;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(d) = &args.out_dir {
        s.output_dir = Some(d.clone());
    }
    s.validate()?;
    Ok(s)
}

fn out_dir(dir: Option<&PathBuf>) -> Result<PathBuf> {
    let d = dir.cloned().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&d).map_err(|e| Error::config(format!("{}: {e}", d.display())))?;
    Ok(d)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::config(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::config(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn simulate(args: &RunArgs) -> Result<()> {
    let s = load_scenario(args)?;
    let dir = out_dir(s.output_dir.as_ref())?;
    let result = run_scenario(&s)?;
    write_csv(&dir.join(format!("{}.csv", s.id)), &result.records)?;
    write_json(&dir.join(format!("{}_metrics.json", s.id)), &result.metrics)?;
    print_json(&result.metrics)
}

#[derive(Serialize)]
struct Comparison {
    scenario_id: String,
    uncertainty_fraction: f64,
    results: Vec<super::metrics::MetricsSummary>,
}

fn compare(args: &RunArgs) -> Result<()> {
    let s = load_scenario(args)?;
    let dir = out_dir(s.output_dir.as_ref())?;
    let summary = Comparison {
        scenario_id: s.id.clone(),
        uncertainty_fraction: s.uncertainty_fraction,
        results: compare_controllers(&s)?,
    };
    write_json(&dir.join("comparison.json"), &summary)?;
    print_json(&summary)
}

fn check_impedance(args: &CheckArgs) -> Result<bool> {
    let profile = match &args.profile {
        Some(p) => {
            let text = read_file(p)?;
            let prof: ImpedanceProfile =
                serde_json::from_str(&text).map_err(|e| Error::config(format!("profile JSON: {e}")))?;
            prof.validate()?;
            prof
        }
        None => ImpedanceProfile::variable(),
    };
    let grid = time_grid(args.horizon, args.grid_step).map_err(|e| Error::config(e.to_string()))?;
    let alpha = match profile.alpha {
        Some(a) => a,
        None => select_alpha(&profile, &grid)?,
    };
    let mut report = check_stability(&profile, alpha, &grid)?;
    if !args.samples {
        report.samples.clear();
    }
    print_json(&report)?;
    Ok(report.pass)
}

fn estimate_demo(args: &DemoArgs) -> Result<()> {
    let params = RobotParams::default();
    let omega = Vector4::new(0.02, -0.01, 0.01, -0.03);
    let load = Vector4::new(0.12, 0.0, 0.04, 0.0);
    let mut runs = Vec::new();
    for &gain in &args.ki {
        if gain * args.dt > 1.0 {
            return Err(Error::config(format!("K_I·dt = {} exceeds 1", gain * args.dt)));
        }
        runs.push(estimator_step_response(&omega, &load, gain, args.dt, args.duration, &params)?);
    }
    if let Some(d) = &args.out_dir {
        let dir = out_dir(Some(d))?;
        write_json(&dir.join("estimate_demo.json"), &runs)?;
    }
    let summary: Vec<_> = runs
        .iter()
        .map(|r| {
            serde_json::json!({
                "gain": r.gain,
                "max_relative_model_error": r.max_relative_model_error,
                "mean_relative_tracking_error": r.mean_relative_tracking_error,
                "final_relative_error": r.final_relative_error,
            })
        })
        .collect();
    print_json(&summary)
}

/// Executes a parsed command.
pub fn run(cli: &Cli) -> std::result::Result<(), CliFailure> {
    match &cli.command {
        Command::Simulate(a) => simulate(a)?,
        Command::Compare(a) => compare(a)?,
        Command::CheckImpedance(a) => {
            if !check_impedance(a)? {
                return Err(CliFailure {
                    status: 1,
                    error: Error::Certification {
                        time: f64::NAN,
                        eigenvalue: f64::NAN,
                        reason: "profile does not satisfy the stability constraints".into(),
                    },
                });
            }
        }
        Command::EstimateDemo(a) => estimate_demo(a)?,
    }
    Ok(())
}

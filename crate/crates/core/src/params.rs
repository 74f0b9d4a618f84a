//! Physical constants of the two-segment manipulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural parameters shared by both segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    /// Distance from the backbone to the cable holes on each disk (m).
    pub disk_radius: f64,
    /// Arc length of each segment (m).
    pub segment_length: [f64; 2],
    /// Lumped mass of each segment (kg).
    pub segment_mass: [f64; 2],
    /// Bending stiffness k_ψ (N·m).
    pub bending_stiffness: f64,
    /// Torsional stiffness k_φ (N·m).
    pub torsional_stiffness: f64,
    /// Bending inertia J_ψ (kg·m²).
    pub bending_inertia: f64,
    /// Torsional inertia J_φ (kg·m²).
    pub torsional_inertia: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            disk_radius: 0.03,
            segment_length: [0.15, 0.15],
            segment_mass: [0.25, 0.25],
            bending_stiffness: 0.5,
            torsional_stiffness: 1.0,
            bending_inertia: 4.5e-3,
            torsional_inertia: 9e-4,
            gravity: 9.81,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let values = [
            ("disk_radius", self.disk_radius),
            ("segment_length[0]", self.segment_length[0]),
            ("segment_length[1]", self.segment_length[1]),
            ("segment_mass[0]", self.segment_mass[0]),
            ("segment_mass[1]", self.segment_mass[1]),
            ("bending_stiffness", self.bending_stiffness),
            ("torsional_stiffness", self.torsional_stiffness),
            ("bending_inertia", self.bending_inertia),
            ("torsional_inertia", self.torsional_inertia),
            ("gravity", self.gravity),
        ];
        for (name, v) in values {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Total arc length l₁ + l₂, the reach bound of the end effector.
    pub fn reach(&self) -> f64 {
        self.segment_length[0] + self.segment_length[1]
    }

    /// Returns the "true plant" seen by a controller that keeps `self` as its
    /// nominal model: masses, stiffnesses and inertias are scaled by
    /// `1 + fraction`, geometry is left untouched.
    pub fn perturb(&self, fraction: f64) -> Result<RobotParams> {
        if !(fraction.is_finite() && (0.0..1.0).contains(&fraction)) {
            return Err(Error::domain(format!(
                "uncertainty fraction must lie in [0, 1), got {fraction}"
            )));
        }
        let s = 1.0 + fraction;
        Ok(RobotParams {
            segment_mass: [self.segment_mass[0] * s, self.segment_mass[1] * s],
            bending_stiffness: self.bending_stiffness * s,
            torsional_stiffness: self.torsional_stiffness * s,
            bending_inertia: self.bending_inertia * s,
            torsional_inertia: self.torsional_inertia * s,
            ..*self
        })
    }
}

/// Free-function form of [`RobotParams::perturb`].
pub fn perturb_params(params: &RobotParams, fraction: f64) -> Result<RobotParams> {
    params.perturb(fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_fraction_is_identity() {
        let p = RobotParams::default();
        assert_eq!(p.perturb(0.0).unwrap(), p);
    }

    #[test]
    fn ten_and_twenty_five_percent() {
        let p = RobotParams::default();
        let q = p.perturb(0.10).unwrap();
        assert!((q.segment_mass[0] - 0.275).abs() < 1e-12);
        assert!((q.torsional_inertia - 9.9e-4).abs() < 1e-15);
        assert_eq!(q.segment_length, p.segment_length);
        assert_eq!(q.disk_radius, p.disk_radius);
        let q = p.perturb(0.25).unwrap();
        assert!((q.segment_mass[1] - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn fraction_of_one_rejected() {
        let p = RobotParams::default();
        assert!(matches!(p.perturb(1.0), Err(Error::Domain(_))));
        assert!(p.perturb(-0.1).is_err());
    }

    #[test]
    fn defaults_validate() {
        RobotParams::default().validate().unwrap();
        let p = RobotParams {
            bending_inertia: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}

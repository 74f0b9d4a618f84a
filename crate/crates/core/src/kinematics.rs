//! Constant-curvature kinematics of the two-segment arm.
//!
//! Three coordinate spaces are involved:
//!
//! * actuator space: six cable lengths, three per segment;
//! * configuration space: `Ω = [κ₁, φ₁, κ₂, φ₂]`, curvature and bending-plane
//!   angle of each segment (arc lengths are fixed by [`RobotParams`]);
//! * task space: end-effector position plus an axis-angle orientation vector.
//!
//! The segment transform is the composed rotation `Rz(φ)·Ry(κl)·Rz(−φ)` with the
//! arc translation `(cφ(1−cos κl)/κ, sφ(1−cos κl)/κ, sin κl/κ)`. The base sits
//! at the origin with the undeformed backbone along +z.
//!
//! Signed curvature is accepted everywhere on the configuration side: a
//! negative κ bends the segment toward `φ + π`. Canonical states (κ ≥ 0,
//! φ ∈ (−π, π]) are produced by [`canonical_segment`].

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Matrix6x4, SMatrix, Vector3, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::params::RobotParams;

/// Curvature (1/m) below which a segment is treated as straight when mapping
/// cable lengths to configuration; φ is then reported as 0.
pub const CURVATURE_EPSILON: f64 = 1e-6;

/// Bending angle below which the arc functions switch to their Taylor series.
const SERIES_ANGLE: f64 = 1e-3;

const CABLE_PHASE: [f64; 3] = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];

/// Six cable lengths `l_{i,j}` in meters, indexed `[segment][cable]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorState {
    pub lengths: [[f64; 3]; 2],
}

impl ActuatorState {
    pub fn new(lengths: [[f64; 3]; 2]) -> Result<Self> {
        for (i, seg) in lengths.iter().enumerate() {
            for (j, &l) in seg.iter().enumerate() {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::domain(format!(
                        "cable length l[{},{}] must be positive, got {l}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { lengths })
    }

    /// Flattened `[l11, l12, l13, l21, l22, l23]`.
    pub fn as_array(&self) -> [f64; 6] {
        let [a, b] = self.lengths;
        [a[0], a[1], a[2], b[0], b[1], b[2]]
    }
}

/// Curvature, bending-plane angle and arc length of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentConfig {
    pub curvature: f64,
    pub torsion: f64,
    pub length: f64,
}

/// Position, velocity and acceleration in configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConfigurationState {
    pub omega: Vector4<f64>,
    pub omega_dot: Vector4<f64>,
    pub omega_ddot: Vector4<f64>,
}

impl ConfigurationState {
    pub fn at_rest(omega: Vector4<f64>) -> Self {
        Self {
            omega,
            ..Default::default()
        }
    }

    /// Checks the canonical-domain invariants against the given arc lengths.
    pub fn check_canonical(&self, params: &RobotParams) -> Result<()> {
        for i in 0..2 {
            let k = self.omega[2 * i];
            let phi = self.omega[2 * i + 1];
            if k < 0.0 {
                return Err(Error::domain(format!("κ{} = {k} is negative", i + 1)));
            }
            if k * params.segment_length[i] >= 2.0 * PI {
                return Err(Error::domain(format!("segment {} bends a full turn", i + 1)));
            }
            if !(phi > -PI && phi <= PI) {
                return Err(Error::domain(format!("φ{} = {phi} outside (−π, π]", i + 1)));
            }
        }
        Ok(())
    }
}

/// End-effector pose: position (m) and axis-angle rotation vector (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskState {
    pub position: Vector3<f64>,
    pub rotation: Vector3<f64>,
}

impl TaskState {
    /// `[x, y, z, ω_x, ω_y, ω_z]`.
    pub fn to_vector(&self) -> Vector6<f64> {
        let p = self.position;
        let w = self.rotation;
        Vector6::new(p.x, p.y, p.z, w.x, w.y, w.z)
    }
}

/// Rigid transform stored as rotation block plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl HomogeneousTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn compose(&self, other: &HomogeneousTransform) -> HomogeneousTransform {
        HomogeneousTransform {
            rotation: self.rotation * other.rotation,
            translation: self.translation + self.rotation * other.translation,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Maps a signed (κ, φ) pair to its canonical representative κ ≥ 0,
/// φ ∈ (−π, π]. Straight segments get φ = 0.
pub fn canonical_segment(curvature: f64, torsion: f64) -> (f64, f64) {
    if curvature.abs() < CURVATURE_EPSILON {
        (0.0, 0.0)
    } else if curvature < 0.0 {
        (-curvature, wrap_angle(torsion + PI))
    } else {
        (curvature, wrap_angle(torsion))
    }
}

/// Canonicalizes both segments of a configuration vector.
pub fn canonical_configuration(omega: &Vector4<f64>) -> Vector4<f64> {
    let (k1, p1) = canonical_segment(omega[0], omega[1]);
    let (k2, p2) = canonical_segment(omega[2], omega[3]);
    Vector4::new(k1, p1, k2, p2)
}

/// Cable lengths of one segment to (κ, φ, l).
pub fn segment_from_cables(l: &[f64; 3], disk_radius: f64) -> Result<SegmentConfig> {
    if !(disk_radius.is_finite() && disk_radius > 0.0) {
        return Err(Error::domain(format!("disk radius must be positive, got {disk_radius}")));
    }
    if let Some(bad) = l.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::domain(format!("cable length must be positive, got {bad}")));
    }
    let [l1, l2, l3] = *l;
    let sum = l1 + l2 + l3;
    let radicand = (l1 * l1 + l2 * l2 + l3 * l3 - l1 * l2 - l2 * l3 - l3 * l1).max(0.0);
    let curvature = 2.0 * radicand.sqrt() / (disk_radius * sum);
    let length = sum / 3.0;
    if curvature < CURVATURE_EPSILON {
        return Ok(SegmentConfig {
            curvature: 0.0,
            torsion: 0.0,
            length,
        });
    }
    let torsion = (2.0 * l1 - l2 - l3).atan2(3f64.sqrt() * (l2 - l3));
    Ok(SegmentConfig {
        curvature,
        torsion,
        length,
    })
}

/// Actuator space to configuration space for both segments.
pub fn actuators_to_configuration(q: &ActuatorState, disk_radius: f64) -> Result<[SegmentConfig; 2]> {
    Ok([
        segment_from_cables(&q.lengths[0], disk_radius)?,
        segment_from_cables(&q.lengths[1], disk_radius)?,
    ])
}

/// Cable lengths realizing one segment configuration.
///
/// `l_j = l·(1 + r·κ·sin(φ + (j−1)·2π/3))` is the exact inverse of
/// [`segment_from_cables`]; the mean cable length equals `l`.
pub fn cables_from_segment(seg: &SegmentConfig, disk_radius: f64) -> Result<[f64; 3]> {
    if !(disk_radius.is_finite() && disk_radius > 0.0) {
        return Err(Error::domain(format!("disk radius must be positive, got {disk_radius}")));
    }
    if !(seg.length.is_finite() && seg.length > 0.0) {
        return Err(Error::domain(format!("arc length must be positive, got {}", seg.length)));
    }
    if (seg.curvature * seg.length).abs() >= 2.0 * PI {
        return Err(Error::domain("bending angle κ·l must stay below a full turn"));
    }
    let mut out = [0.0; 3];
    for (o, phase) in out.iter_mut().zip(CABLE_PHASE) {
        *o = seg.length * (1.0 + disk_radius * seg.curvature * (seg.torsion + phase).sin());
        if *o <= 0.0 {
            return Err(Error::domain(format!(
                "configuration (κ = {}, φ = {}) needs a non-positive cable length",
                seg.curvature, seg.torsion
            )));
        }
    }
    Ok(out)
}

/// Configuration space to actuator space for both segments.
pub fn configuration_to_actuators(segments: &[SegmentConfig; 2], disk_radius: f64) -> Result<ActuatorState> {
    ActuatorState::new([
        cables_from_segment(&segments[0], disk_radius)?,
        cables_from_segment(&segments[1], disk_radius)?,
    ])
}

/// Cable lengths for a configuration vector, using the arc lengths of `params`.
pub fn cable_lengths(omega: &Vector4<f64>, params: &RobotParams) -> Result<ActuatorState> {
    let seg = |i: usize| SegmentConfig {
        curvature: omega[2 * i],
        torsion: omega[2 * i + 1],
        length: params.segment_length[i],
    };
    configuration_to_actuators(&[seg(0), seg(1)], params.disk_radius)
}

/// Result of [`jacobian_actuator_to_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorJacobian {
    /// ∂(κ₁, φ₁, κ₂, φ₂)/∂(l₁₁ … l₂₃).
    pub matrix: SMatrix<f64, 4, 6>,
    /// Segments sitting at the equal-lengths point, where κ is not
    /// differentiable and φ is undefined. Their rows are left at zero.
    pub singular: [bool; 2],
}

/// Analytic Jacobian of [`actuators_to_configuration`] with respect to the
/// six cable lengths (arc-length rows omitted: they are constant 1/3).
pub fn jacobian_actuator_to_config(q: &ActuatorState, disk_radius: f64) -> Result<ActuatorJacobian> {
    let mut matrix = SMatrix::<f64, 4, 6>::zeros();
    let mut singular = [false; 2];
    let sqrt3 = 3f64.sqrt();
    for (i, l) in q.lengths.iter().enumerate() {
        let seg = segment_from_cables(l, disk_radius)?;
        if seg.curvature == 0.0 {
            singular[i] = true;
            continue;
        }
        let [l1, l2, l3] = *l;
        let sum = l1 + l2 + l3;
        let radicand = l1 * l1 + l2 * l2 + l3 * l3 - l1 * l2 - l2 * l3 - l3 * l1;
        let root = radicand.sqrt();
        let d_radicand = [2.0 * l1 - l2 - l3, 2.0 * l2 - l1 - l3, 2.0 * l3 - l1 - l2];
        let y = 2.0 * l1 - l2 - l3;
        let x = sqrt3 * (l2 - l3);
        let dy = [2.0, -1.0, -1.0];
        let dx = [0.0, sqrt3, -sqrt3];
        let r2 = x * x + y * y;
        for j in 0..3 {
            matrix[(2 * i, 3 * i + j)] =
                d_radicand[j] / (disk_radius * sum * root) - seg.curvature / sum;
            matrix[(2 * i + 1, 3 * i + j)] = (x * dy[j] - y * dx[j]) / r2;
        }
    }
    Ok(ActuatorJacobian { matrix, singular })
}

/// `(1 − cos κl)/κ`, `sin(κl)/κ` and their κ-derivatives.
#[derive(Debug, Clone, Copy)]
struct ArcTerms {
    f: f64,
    g: f64,
    df: f64,
    dg: f64,
}

fn arc_terms(k: f64, l: f64) -> ArcTerms {
    let t = k * l;
    if t.abs() < SERIES_ANGLE {
        let t2 = t * t;
        ArcTerms {
            f: l * t * (0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2 * t2 * t2 / 40320.0),
            g: l * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0),
            df: l * l * (0.5 - t2 / 8.0 + t2 * t2 / 144.0 - 7.0 * t2 * t2 * t2 / 40320.0),
            dg: l * l * t * (-1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0),
        }
    } else {
        let (s, c) = t.sin_cos();
        let versine = 2.0 * (0.5 * t).sin().powi(2);
        ArcTerms {
            f: versine / k,
            g: s / k,
            df: (t * s - versine) / (k * k),
            dg: (t * c - s) / (k * k),
        }
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Transform from the base to the tip frame of one segment.
pub fn segment_transform(curvature: f64, torsion: f64, length: f64) -> HomogeneousTransform {
    let arc = arc_terms(curvature, length);
    let rz = rot_z(torsion);
    let (s, c) = torsion.sin_cos();
    HomogeneousTransform {
        rotation: rz * rot_y(curvature * length) * rz.transpose(),
        translation: Vector3::new(c * arc.f, s * arc.f, arc.g),
    }
}

/// The segment matrix evaluated entry by entry from the printed
/// closed form, kept only as a diagnostic. Its (1,3) entry and the sign of
/// its x translation disagree with [`segment_transform`]; the block is not
/// orthonormal in general.
pub fn literal_segment_matrix(curvature: f64, torsion: f64, length: f64) -> Matrix4<f64> {
    let t = curvature * length;
    let (st, ct) = t.sin_cos();
    let (sp, cp) = torsion.sin_cos();
    let a = ct - 1.0;
    Matrix4::new(
        cp * cp * a + 1.0, sp * cp * a, sp * ct, cp * a / curvature,
        sp * cp * a, ct - cp * cp * a, sp * st, -sp * a / curvature,
        -cp * st, -sp * st, ct, st / curvature,
        0.0, 0.0, 0.0, 1.0,
    )
}

/// Per-entry difference `segment_transform − literal_segment_matrix`.
pub fn literal_transform_discrepancy(curvature: f64, torsion: f64, length: f64) -> Matrix4<f64> {
    segment_transform(curvature, torsion, length).to_matrix()
        - literal_segment_matrix(curvature, torsion, length)
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation vector (axis·angle) of a rotation matrix.
pub fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let v = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) * 0.5;
    let s = v.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let angle = s.atan2(c);
    if angle < 1e-4 {
        let a2 = angle * angle;
        return v * (1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0);
    }
    if c > -0.9 {
        return v * (angle / s);
    }
    // Near a half turn: recover the axis from the symmetric part.
    let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * c;
    let mut best = 0;
    for i in 1..3 {
        if sym[(i, i)] > sym[(best, best)] {
            best = i;
        }
    }
    let mut axis: Vector3<f64> = sym.column(best).into();
    axis /= axis.norm();
    if axis.dot(&v) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

/// Inverse of the left Jacobian of SO(3): maps a spatial angular velocity to
/// the rate of the rotation vector `rot`.
fn left_jacobian_inverse(rot: &Vector3<f64>) -> Matrix3<f64> {
    let angle = rot.norm();
    let a2 = angle * angle;
    let coeff = if angle < 1e-3 {
        1.0 / 12.0 + a2 / 720.0 + a2 * a2 / 30240.0
    } else {
        let half = 0.5 * angle;
        (1.0 - half * half.cos() / half.sin()) / a2
    };
    let k = skew(rot);
    Matrix3::identity() - k * 0.5 + k * k * coeff
}

/// Forward kinematics output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardKinematics {
    /// World transforms of the segment 1 tip and the end effector.
    pub frames: [HomogeneousTransform; 2],
    pub task: TaskState,
}

/// Everything the dynamics needs from the kinematic chain: the two tip frames
/// and the derivatives of positions and orientation with respect to Ω.
#[derive(Debug, Clone, Copy)]
pub struct ChainDerivatives {
    pub frames: [HomogeneousTransform; 2],
    /// Translational Jacobians of the segment 1 tip and the end effector.
    pub tip_jacobians: [Matrix3x4<f64>; 2],
    /// Spatial angular-velocity Jacobian of the end frame.
    pub angular_jacobian: Matrix3x4<f64>,
}

struct SegmentDerivatives {
    transform: HomogeneousTransform,
    d_rotation: [Matrix3<f64>; 2],
    d_translation: [Vector3<f64>; 2],
    /// Spatial angular velocity (in the segment base frame) per unit κ̇, φ̇.
    omega_local: [Vector3<f64>; 2],
}

fn segment_derivatives(k: f64, phi: f64, l: f64) -> SegmentDerivatives {
    let transform = segment_transform(k, phi, l);
    let arc = arc_terms(k, l);
    let (s, c) = phi.sin_cos();
    let r = transform.rotation;
    let ez = Vector3::z();
    let u = Vector3::new(-s, c, 0.0);
    let d_rk = r * skew(&u) * l;
    let d_rphi = skew(&ez) * r - r * skew(&ez);
    SegmentDerivatives {
        transform,
        d_rotation: [d_rk, d_rphi],
        d_translation: [
            Vector3::new(c * arc.df, s * arc.df, arc.dg),
            Vector3::new(-s * arc.f, c * arc.f, 0.0),
        ],
        omega_local: [r * u * l, ez - r * ez],
    }
}

/// Composes both segments and differentiates the chain analytically.
pub fn chain_derivatives(omega: &Vector4<f64>, params: &RobotParams) -> ChainDerivatives {
    let s1 = segment_derivatives(omega[0], omega[1], params.segment_length[0]);
    let s2 = segment_derivatives(omega[2], omega[3], params.segment_length[1]);
    let t1 = s1.transform;
    let t2 = t1.compose(&s2.transform);
    let r1 = t1.rotation;
    let o2 = s2.transform.translation;

    let mut j1 = Matrix3x4::zeros();
    let mut j2 = Matrix3x4::zeros();
    let mut jw = Matrix3x4::zeros();
    for k in 0..2 {
        let dp1 = s1.d_translation[k];
        j1.set_column(k, &dp1);
        j2.set_column(k, &(dp1 + s1.d_rotation[k] * o2));
        jw.set_column(k, &s1.omega_local[k]);
        j2.set_column(2 + k, &(r1 * s2.d_translation[k]));
        jw.set_column(2 + k, &(r1 * s2.omega_local[k]));
    }
    ChainDerivatives {
        frames: [t1, t2],
        tip_jacobians: [j1, j2],
        angular_jacobian: jw,
    }
}

/// End-effector pose and the intermediate segment 1 tip frame.
pub fn forward_kinematics(omega: &Vector4<f64>, params: &RobotParams) -> ForwardKinematics {
    let t1 = segment_transform(omega[0], omega[1], params.segment_length[0]);
    let t2 = t1.compose(&segment_transform(omega[2], omega[3], params.segment_length[1]));
    ForwardKinematics {
        frames: [t1, t2],
        task: TaskState {
            position: t2.translation,
            rotation: rotation_log(&t2.rotation),
        },
    }
}

/// J₁ = ∂χ/∂Ω (6×4): translational rows from the chain derivatives, rotational
/// rows as the rate of the axis-angle vector.
pub fn jacobian_config_to_task(omega: &Vector4<f64>, params: &RobotParams) -> Matrix6x4<f64> {
    let chain = chain_derivatives(omega, params);
    let rot = rotation_log(&chain.frames[1].rotation);
    let jr = left_jacobian_inverse(&rot) * chain.angular_jacobian;
    let mut j = Matrix6x4::zeros();
    j.fixed_view_mut::<3, 4>(0, 0).copy_from(&chain.tip_jacobians[1]);
    j.fixed_view_mut::<3, 4>(3, 0).copy_from(&jr);
    j
}

/// J̇₁ along the motion, by central differences of J₁ in the direction Ω̇.
pub fn jacobian_config_to_task_rate(
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    params: &RobotParams,
) -> Matrix6x4<f64> {
    let speed = omega_dot.norm();
    if speed == 0.0 {
        return Matrix6x4::zeros();
    }
    let h = 1e-6 / speed;
    let plus = jacobian_config_to_task(&(omega + omega_dot * h), params);
    let minus = jacobian_config_to_task(&(omega - omega_dot * h), params);
    (plus - minus) / (2.0 * h)
}

/// Task-from-actuator Jacobian `J₁(Ω(q))·J_AC(q)` (6×6).
pub fn jacobian_actuator_to_task(q: &ActuatorState, params: &RobotParams) -> Result<SMatrix<f64, 6, 6>> {
    let segs = actuators_to_configuration(q, params.disk_radius)?;
    let omega = Vector4::new(segs[0].curvature, segs[0].torsion, segs[1].curvature, segs[1].torsion);
    let jac = jacobian_actuator_to_config(q, params.disk_radius)?;
    Ok(jacobian_config_to_task(&omega, params) * jac.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> RobotParams {
        RobotParams::default()
    }

    #[test]
    fn equal_cables_are_straight() {
        let seg = segment_from_cables(&[0.15, 0.15, 0.15], 0.03).unwrap();
        assert_eq!(seg.curvature, 0.0);
        assert_eq!(seg.torsion, 0.0);
        assert_relative_eq!(seg.length, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn bent_cable_triple() {
        let seg = segment_from_cables(&[0.16, 0.15, 0.14], 0.03).unwrap();
        // radicand = 3e-4, sum = 0.45
        let expected = 2.0 * 3e-4f64.sqrt() / (0.03 * 0.45);
        assert_relative_eq!(seg.curvature, expected, max_relative = 1e-9);
        assert!((seg.curvature - 2.5659).abs() < 2e-4);
        assert_relative_eq!(seg.torsion, PI / 3.0, epsilon = 1e-12);
        assert_relative_eq!(seg.length, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_cables_give_quarter_turn() {
        let up = segment_from_cables(&[0.16, 0.15, 0.15], 0.03).unwrap();
        assert_relative_eq!(up.torsion, PI / 2.0, epsilon = 1e-12);
        let down = segment_from_cables(&[0.14, 0.15, 0.15], 0.03).unwrap();
        assert_relative_eq!(down.torsion, -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn non_positive_inputs_rejected() {
        assert!(segment_from_cables(&[0.15, 0.0, 0.15], 0.03).is_err());
        assert!(segment_from_cables(&[0.15, 0.15, 0.15], 0.0).is_err());
        assert!(ActuatorState::new([[0.1, 0.1, -0.1], [0.1; 3]]).is_err());
    }

    #[test]
    fn straight_segment_inverse() {
        let seg = SegmentConfig {
            curvature: 0.0,
            torsion: 1.3,
            length: 0.15,
        };
        let l = cables_from_segment(&seg, 0.03).unwrap();
        assert_eq!(l, [0.15, 0.15, 0.15]);
    }

    #[test]
    fn one_millimeter_bends() {
        let seg = segment_from_cables(&[0.151, 0.15, 0.15], 0.03).unwrap();
        assert!(seg.curvature > 0.0);
    }

    #[test]
    fn extreme_curvature_rejected_by_inverse() {
        let seg = SegmentConfig {
            curvature: 40.0,
            torsion: -PI / 2.0,
            length: 0.15,
        };
        assert!(cables_from_segment(&seg, 0.03).is_err());
    }

    #[test]
    fn zero_curvature_transform() {
        let t = segment_transform(0.0, 0.7, 0.15);
        assert_relative_eq!(t.rotation, Matrix3::identity(), epsilon = 1e-15);
        assert_relative_eq!(t.translation, Vector3::new(0.0, 0.0, 0.15), epsilon = 1e-15);
        let m = t.to_matrix();
        assert_eq!(m.row(3).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn half_turn_transform() {
        let l = 0.15;
        let k = PI / l;
        let t = segment_transform(k, 0.0, l);
        // Arc of half a turn ends one diameter away from the base, facing down.
        assert_relative_eq!(t.translation, Vector3::new(2.0 / k, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(t.rotation[(2, 2)], -1.0, epsilon = 1e-12);
        // The printed matrix puts the same point on the −x side.
        let lit = literal_segment_matrix(k, 0.0, l);
        assert_relative_eq!(lit[(0, 3)], -2.0 / k, epsilon = 1e-12);
        assert_relative_eq!(-2.0 / k, -0.0955, epsilon = 1e-4);
    }

    #[test]
    fn literal_matrix_agrees_elsewhere() {
        let (k, phi, l) = (4.0, 0.4, 0.15);
        let d = literal_transform_discrepancy(k, phi, l);
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) == (0, 2) || (i, j) == (0, 3) {
                    continue;
                }
                assert!(d[(i, j)].abs() < 1e-12, "entry ({i},{j}) differs by {}", d[(i, j)]);
            }
        }
        assert!(d[(0, 3)].abs() > 1e-3);
    }

    #[test]
    fn branch_switch_is_continuous() {
        let l = 0.15;
        for k in [CURVATURE_EPSILON, SERIES_ANGLE / l] {
            let below = segment_transform(k * (1.0 - 1e-12), 0.3, l);
            let above = segment_transform(k * (1.0 + 1e-12), 0.3, l);
            assert!((below.to_matrix() - above.to_matrix()).abs().max() < 1e-9);
            // Series and closed form side by side at the switch point.
            let a = arc_terms(k, l);
            let t = k * l;
            assert!((a.f - 2.0 * (0.5 * t).sin().powi(2) / k).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_robot_reaches_up() {
        let fk = forward_kinematics(&Vector4::zeros(), &params());
        assert_relative_eq!(fk.task.position, Vector3::new(0.0, 0.0, 0.30), epsilon = 1e-15);
        assert_relative_eq!(fk.task.rotation, Vector3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn quarter_bend_composes_by_hand() {
        let p = params();
        let k1 = PI / 2.0 / 0.15;
        let fk = forward_kinematics(&Vector4::new(k1, 0.0, 0.0, 0.0), &p);
        // Tip of segment 1 at (1/κ, 0, 1/κ) with the tangent along +x; the
        // straight segment 2 then extends 0.15 m along +x.
        let r = 1.0 / k1;
        assert_relative_eq!(fk.frames[0].translation, Vector3::new(r, 0.0, r), epsilon = 1e-12);
        assert_relative_eq!(fk.task.position, Vector3::new(r + 0.15, 0.0, r), epsilon = 1e-12);
        assert_relative_eq!(fk.task.rotation, Vector3::new(0.0, PI / 2.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn rotation_log_near_half_turn() {
        let r = rot_y(PI - 1e-9);
        let w = rotation_log(&r);
        assert_relative_eq!(w.norm(), PI - 1e-9, epsilon = 1e-8);
        assert!(w.y > 0.0);
        let w = rotation_log(&rot_z(0.3));
        assert_relative_eq!(w, Vector3::new(0.0, 0.0, 0.3), epsilon = 1e-14);
    }

    #[test]
    fn jacobian_finite_at_straight_pose() {
        let j = jacobian_config_to_task(&Vector4::zeros(), &params());
        assert!(j.iter().all(|v| v.is_finite()));
        // Bending segment 1 toward +x moves the tip by l₁²/2 + l₁l₂.
        assert_relative_eq!(j[(0, 0)], 0.15 * 0.15 / 2.0 + 0.15 * 0.15, epsilon = 1e-12);
        assert_relative_eq!(j[(0, 2)], 0.15 * 0.15 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn straight_cables_report_singular_rows() {
        let q = ActuatorState::new([[0.15; 3], [0.16, 0.15, 0.14]]).unwrap();
        let jac = jacobian_actuator_to_config(&q, 0.03).unwrap();
        assert_eq!(jac.singular, [true, false]);
        assert!(jac.matrix.row(0).iter().all(|v| *v == 0.0));
        assert!(jac.matrix.row(2).iter().any(|v| *v != 0.0));
    }

    #[test]
    fn uniform_cable_shift_leaves_curvature_nearly_unchanged() {
        // A uniform shift changes only the mean length term: ∂κ·1 = −3κ/Σ.
        let q = ActuatorState::new([[0.16, 0.15, 0.14], [0.152, 0.149, 0.151]]).unwrap();
        let jac = jacobian_actuator_to_config(&q, 0.03).unwrap();
        for seg in 0..2 {
            let row = jac.matrix.row(2 * seg);
            let sum: f64 = (0..3).map(|j| row[3 * seg + j]).sum();
            let l = q.lengths[seg];
            let kappa = segment_from_cables(&l, 0.03).unwrap().curvature;
            assert_relative_eq!(sum, -3.0 * kappa / (l[0] + l[1] + l[2]), max_relative = 1e-9);
            let phi_row = jac.matrix.row(2 * seg + 1);
            let phi_sum: f64 = (0..3).map(|j| phi_row[3 * seg + j]).sum();
            assert!(phi_sum.abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_segment_flips_negative_curvature() {
        let (k, phi) = canonical_segment(-2.0, 0.5);
        assert_eq!(k, 2.0);
        assert_relative_eq!(phi, 0.5 - PI, epsilon = 1e-15);
        assert_eq!(canonical_segment(1e-9, 2.0), (0.0, 0.0));
        assert_relative_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        // Both representatives describe the same shape.
        let a = segment_transform(-2.0, 0.5, 0.15).to_matrix();
        let b = segment_transform(k, phi, 0.15).to_matrix();
        assert_relative_eq!(a, b, epsilon = 1e-14);
    }
}

//! Time-varying impedance: profiles, stability certification, and the
//! task → configuration admittance reference.
//!
//! A profile prescribes the target relation
//! `M_d(t)Ξ̈ + C_d(t)Ξ̇ + K_d(t)Ξ = τ_e` for the task error `Ξ`. It is
//! certified for a rate constant `α` when, at every sample of a time grid,
//!
//! * `B = Ṁ_d + αM_d − C_d ≤ 0`,
//! * `Q = (α² + 2α)Ṁ_d − αM̈_d + αĊ_d + K̇_d − 2αK_d ≤ 0`,
//! * `μ = −α²M_d − αṀ_d + K_d + αC_d ≻ 0`.
//!
//! The admittance loop maps the profile into configuration space through the
//! task Jacobian and integrates it to produce the compliant reference that the
//! inner tracking controller follows.

use nalgebra::{Matrix4, Matrix6, Matrix6x4, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default certification grid spacing (s).
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// Ridge always added to the admittance matrices before the solve.
pub const ADMITTANCE_RIDGE: f64 = 1e-9;

/// Relative tolerance used when comparing eigenvalues against zero.
const EIGEN_TOLERANCE: f64 = 1e-12;

/// `offset + amplitude·sin(frequency·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Sinusoid {
    pub fn constant(value: f64) -> Self {
        Self {
            offset: value,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
        }
    }

    pub fn new(offset: f64, amplitude: f64, frequency: f64) -> Self {
        Self {
            offset,
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    /// Value and first two time derivatives.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let arg = self.frequency * t + self.phase;
        let (s, c) = arg.sin_cos();
        let w = self.frequency;
        [
            self.offset + self.amplitude * s,
            self.amplitude * w * c,
            -self.amplitude * w * w * s,
        ]
    }

    fn is_finite(&self) -> bool {
        [self.offset, self.amplitude, self.frequency, self.phase]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// A 6×6 matrix-valued signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSignal {
    /// `s(t)·I`
    Scalar(Sinusoid),
    /// `diag(s₁(t), …, s₆(t))`
    Diagonal([Sinusoid; 6]),
}

impl MatrixSignal {
    /// Value and first two time derivatives.
    pub fn eval(&self, t: f64) -> [Matrix6<f64>; 3] {
        match self {
            MatrixSignal::Scalar(s) => {
                let v = s.eval(t);
                v.map(|x| Matrix6::identity() * x)
            }
            MatrixSignal::Diagonal(axes) => {
                let v = axes.map(|s| s.eval(t));
                std::array::from_fn(|d| Matrix6::from_diagonal(&Vector6::from_fn(|i, _| v[i][d])))
            }
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, MatrixSignal::Scalar(_))
    }

    fn is_finite(&self) -> bool {
        match self {
            MatrixSignal::Scalar(s) => s.is_finite(),
            MatrixSignal::Diagonal(a) => a.iter().all(Sinusoid::is_finite),
        }
    }
}

/// How the damping matrix is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSpec {
    /// `C_d = Ṁ_d + αM_d`, which makes the first certification constraint an
    /// identity.
    InertiaRate,
    Explicit(MatrixSignal),
}

/// Desired task-space inertia, damping and stiffness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpedanceProfile {
    pub inertia: MatrixSignal,
    pub damping: DampingSpec,
    pub stiffness: MatrixSignal,
    /// Rate constant; `None` means "select it by certification".
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl ImpedanceProfile {
    /// `M_d = [15 + 10 sin(πt/5)]·I`, `K_d = [30 + 20 sin(πt/2)]·I`,
    /// `C_d = Ṁ_d + αM_d`.
    pub fn variable() -> Self {
        use std::f64::consts::PI;
        Self {
            inertia: MatrixSignal::Scalar(Sinusoid::new(15.0, 10.0, PI / 5.0)),
            damping: DampingSpec::InertiaRate,
            stiffness: MatrixSignal::Scalar(Sinusoid::new(30.0, 20.0, PI / 2.0)),
            alpha: None,
        }
    }

    /// `M_d = 15·I`, `C_d = 20·I`, `K_d = 30·I`.
    pub fn invariable() -> Self {
        Self {
            inertia: MatrixSignal::Scalar(Sinusoid::constant(15.0)),
            damping: DampingSpec::Explicit(MatrixSignal::Scalar(Sinusoid::constant(20.0))),
            stiffness: MatrixSignal::Scalar(Sinusoid::constant(30.0)),
            alpha: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// True when every matrix is a multiple of the identity, in which case the
    /// eigenvalues are the scalars themselves.
    pub fn is_scalar(&self) -> bool {
        self.inertia.is_scalar()
            && self.stiffness.is_scalar()
            && match &self.damping {
                DampingSpec::InertiaRate => true,
                DampingSpec::Explicit(m) => m.is_scalar(),
            }
    }

    pub fn validate(&self) -> Result<()> {
        let damping_ok = match &self.damping {
            DampingSpec::InertiaRate => true,
            DampingSpec::Explicit(m) => m.is_finite(),
        };
        if !(self.inertia.is_finite() && self.stiffness.is_finite() && damping_ok) {
            return Err(Error::config("impedance profile contains non-finite coefficients"));
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::config(format!("alpha must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

/// All matrices of a profile at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub inertia: Matrix6<f64>,
    pub inertia_rate: Matrix6<f64>,
    pub inertia_accel: Matrix6<f64>,
    pub damping: Matrix6<f64>,
    pub damping_rate: Matrix6<f64>,
    pub stiffness: Matrix6<f64>,
    pub stiffness_rate: Matrix6<f64>,
}

impl ProfileSample {
    /// `B = Ṁ_d + αM_d − C_d`
    pub fn constraint_b(&self, alpha: f64) -> Matrix6<f64> {
        self.inertia_rate + self.inertia * alpha - self.damping
    }

    /// `Q = (α² + 2α)Ṁ_d − αM̈_d + αĊ_d + K̇_d − 2αK_d`
    pub fn constraint_q(&self, alpha: f64) -> Matrix6<f64> {
        self.inertia_rate * (alpha * alpha + 2.0 * alpha) - self.inertia_accel * alpha
            + self.damping_rate * alpha
            + self.stiffness_rate
            - self.stiffness * (2.0 * alpha)
    }

    /// `μ = −α²M_d − αṀ_d + K_d + αC_d`
    pub fn mu(&self, alpha: f64) -> Matrix6<f64> {
        -self.inertia * (alpha * alpha) - self.inertia_rate * alpha + self.stiffness + self.damping * alpha
    }
}

/// Evaluates the profile and its derivatives at `t` for rate constant `alpha`
/// (only used when the damping is derived from the inertia).
pub fn eval_profile(profile: &ImpedanceProfile, alpha: f64, t: f64) -> Result<ProfileSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("profile time must be non-negative, got {t}")));
    }
    let [m, md, mdd] = profile.inertia.eval(t);
    let [k, kd, _] = profile.stiffness.eval(t);
    let (c, cd) = match &profile.damping {
        DampingSpec::InertiaRate => (md + m * alpha, mdd + md * alpha),
        DampingSpec::Explicit(sig) => {
            let [c, cd, _] = sig.eval(t);
            (c, cd)
        }
    };
    Ok(ProfileSample {
        inertia: m,
        inertia_rate: md,
        inertia_accel: mdd,
        damping: c,
        damping_rate: cd,
        stiffness: k,
        stiffness_rate: kd,
    })
}

/// Uniform grid `0, h, 2h, …` covering `[0, horizon]`.
pub fn time_grid(horizon: f64, step: f64) -> Result<Vec<f64>> {
    if !(horizon >= 0.0 && step > 0.0 && horizon.is_finite() && step.is_finite()) {
        return Err(Error::domain(format!(
            "grid needs horizon ≥ 0 and step > 0, got {horizon}, {step}"
        )));
    }
    let n = (horizon / step).round() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

/// Eigenvalues of a symmetric 6×6 matrix, ascending.
pub fn symmetric_eigenvalues(m: &Matrix6<f64>) -> Vector6<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Vector6::from_column_slice(&eig)
}

fn extreme_eigenvalues(m: &Matrix6<f64>, scalar: bool) -> (f64, f64) {
    if scalar {
        (m[(0, 0)], m[(0, 0)])
    } else {
        let e = symmetric_eigenvalues(m);
        (e[0], e[5])
    }
}

fn scale_of(sample: &ProfileSample) -> f64 {
    [
        sample.inertia.amax(),
        sample.inertia_rate.amax(),
        sample.damping.amax(),
        sample.stiffness.amax(),
        sample.stiffness_rate.amax(),
    ]
    .into_iter()
    .fold(1.0, f64::max)
}

/// Certification outcome at one grid sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub time: f64,
    pub b_max: f64,
    pub q_max: f64,
    pub mu_min: f64,
    /// `λ_max(K̇_d)`, compared against the stiffness-variation bound.
    pub stiffness_rate_max: f64,
    /// Upper bound on `λ_max(K̇_d)` implied by the second constraint:
    /// `2αλ_min(K_d) − (α² + 2α)λ_max(Ṁ_d) + αλ_min(M̈_d) − αλ_max(Ċ_d)`.
    pub stiffness_rate_bound: f64,
}

/// Result of [`check_stability`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub alpha: f64,
    pub pass: bool,
    /// Most positive eigenvalue of `B` over the grid.
    pub b_margin: f64,
    /// Most positive eigenvalue of `Q` over the grid.
    pub q_margin: f64,
    /// Smallest eigenvalue of `μ` over the grid.
    pub mu_min: f64,
    /// First failing sample, if any.
    pub violation: Option<SampleReport>,
    pub samples: Vec<SampleReport>,
}

fn sample_report(profile: &ImpedanceProfile, alpha: f64, t: f64) -> Result<(SampleReport, f64)> {
    let s = eval_profile(profile, alpha, t)?;
    let scalar = profile.is_scalar();
    let (_, b_max) = extreme_eigenvalues(&s.constraint_b(alpha), scalar);
    let (_, q_max) = extreme_eigenvalues(&s.constraint_q(alpha), scalar);
    let (mu_min, _) = extreme_eigenvalues(&s.mu(alpha), scalar);
    let (k_min, _) = extreme_eigenvalues(&s.stiffness, scalar);
    let (_, kd_max) = extreme_eigenvalues(&s.stiffness_rate, scalar);
    let (_, md_max) = extreme_eigenvalues(&s.inertia_rate, scalar);
    let (mdd_min, _) = extreme_eigenvalues(&s.inertia_accel, scalar);
    let (_, cd_max) = extreme_eigenvalues(&s.damping_rate, scalar);
    let bound = 2.0 * alpha * k_min - (alpha * alpha + 2.0 * alpha) * md_max + alpha * mdd_min - alpha * cd_max;
    Ok((
        SampleReport {
            time: t,
            b_max,
            q_max,
            mu_min,
            stiffness_rate_max: kd_max,
            stiffness_rate_bound: bound,
        },
        scale_of(&s),
    ))
}

fn sample_passes(r: &SampleReport, scale: f64) -> bool {
    // B vanishes identically for derived damping; only rounding is tolerated.
    r.b_max <= EIGEN_TOLERANCE * scale && r.q_max <= 0.0 && r.mu_min > 0.0
}

/// Evaluates both constraints and `μ` at every grid time.
pub fn check_stability(profile: &ImpedanceProfile, alpha: f64, grid: &[f64]) -> Result<StabilityReport> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if grid.is_empty() {
        return Err(Error::domain("certification grid is empty"));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut violation = None;
    let (mut b_margin, mut q_margin, mut mu_min) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for &t in grid {
        let (r, scale) = sample_report(profile, alpha, t)?;
        b_margin = b_margin.max(r.b_max);
        q_margin = q_margin.max(r.q_max);
        mu_min = mu_min.min(r.mu_min);
        if violation.is_none() && !sample_passes(&r, scale) {
            violation = Some(r);
        }
        samples.push(r);
    }
    Ok(StabilityReport {
        alpha,
        pass: violation.is_none(),
        b_margin,
        q_margin,
        mu_min,
        violation,
        samples,
    })
}

fn first_violation(profile: &ImpedanceProfile, alpha: f64, grid: &[f64]) -> Result<Option<SampleReport>> {
    for &t in grid {
        let (r, scale) = sample_report(profile, alpha, t)?;
        if !sample_passes(&r, scale) {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

fn certification_error(v: &SampleReport, alpha: f64) -> Error {
    let (eigenvalue, reason) = if v.mu_min <= 0.0 {
        (v.mu_min, "μ is not positive definite")
    } else if v.b_max > v.q_max {
        (v.b_max, "Ṁ_d + αM_d − C_d has a positive eigenvalue")
    } else {
        (v.q_max, "the stiffness/inertia rate constraint has a positive eigenvalue")
    };
    Error::Certification {
        time: v.time,
        eigenvalue,
        reason: format!("{reason} (α = {alpha:.6})"),
    }
}

/// `min_t (λ_min(C_d) − λ_max(Ṁ_d)) / λ_max(M_d)` for explicit damping.
///
/// For damping derived from the inertia this bound is vacuous and `None` is
/// returned.
pub fn alpha_upper_bound(profile: &ImpedanceProfile, grid: &[f64]) -> Result<Option<f64>> {
    if matches!(profile.damping, DampingSpec::InertiaRate) {
        return Ok(None);
    }
    let scalar = profile.is_scalar();
    let mut bound = f64::INFINITY;
    for &t in grid {
        let s = eval_profile(profile, 0.0, t)?;
        let (c_min, _) = extreme_eigenvalues(&s.damping, scalar);
        let (_, md_max) = extreme_eigenvalues(&s.inertia_rate, scalar);
        let (_, m_max) = extreme_eigenvalues(&s.inertia, scalar);
        bound = bound.min((c_min - md_max) / m_max);
    }
    Ok(Some(bound))
}

/// Number of candidates in the coarse scan used by [`select_alpha`].
const ALPHA_SCAN: usize = 64;
/// Scan ceiling when the damping is derived from the inertia (no closed-form
/// upper bound exists).
const ALPHA_SCAN_CEILING: f64 = 100.0;

/// Largest α that certifies the profile on `grid`.
///
/// The candidate interval is `(0, α_upper]` with `α_upper` from
/// [`alpha_upper_bound`] (or a fixed ceiling when the damping depends on α).
/// A coarse scan locates the largest feasible candidate, then bisection
/// refines the boundary above it to 1e-10.
///
/// The feasible set is not necessarily an interval starting at 0: for the
/// derived-damping profile, the second constraint fails for small α because
/// `K̇_d` must be absorbed by `2αK_d`.
pub fn select_alpha(profile: &ImpedanceProfile, grid: &[f64]) -> Result<f64> {
    profile.validate()?;
    if grid.is_empty() {
        return Err(Error::domain("certification grid is empty"));
    }
    let upper = match alpha_upper_bound(profile, grid)? {
        Some(u) if u <= 0.0 => {
            let t = grid[0];
            return Err(Error::Certification {
                time: t,
                eigenvalue: u,
                reason: "λ_min(C_d) − λ_max(Ṁ_d) is not positive; no α > 0 satisfies the first constraint".into(),
            });
        }
        Some(u) => u,
        None => ALPHA_SCAN_CEILING,
    };

    let mut best: Option<(usize, f64)> = None;
    let mut worst_violation = None;
    for i in (1..=ALPHA_SCAN).rev() {
        let a = upper * i as f64 / ALPHA_SCAN as f64;
        match first_violation(profile, a, grid)? {
            None => {
                best = Some((i, a));
                break;
            }
            Some(v) => {
                if worst_violation.is_none() {
                    worst_violation = Some((v, a));
                }
            }
        }
    }
    // Fine scan near zero for profiles whose feasible set is a thin sliver.
    if best.is_none() {
        let lo = upper / ALPHA_SCAN as f64;
        for i in (1..ALPHA_SCAN).rev() {
            let a = lo * i as f64 / ALPHA_SCAN as f64;
            if first_violation(profile, a, grid)?.is_none() {
                best = Some((0, a));
                break;
            }
        }
    }
    let Some((_, mut lo)) = best else {
        let (v, a) = worst_violation.expect("scan visited at least one candidate");
        return Err(certification_error(&v, a));
    };
    let mut hi = if lo >= upper {
        return Ok(upper);
    } else {
        (lo + upper / ALPHA_SCAN as f64).min(upper)
    };
    if first_violation(profile, hi, grid)?.is_none() {
        return Ok(hi);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if first_violation(profile, mid, grid)?.is_none() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Value of the impedance Lyapunov function and its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    pub v: f64,
    pub v_dot: f64,
}

fn check_mu(sample: &ProfileSample, alpha: f64, t: f64) -> Result<Matrix6<f64>> {
    let mu = sample.mu(alpha);
    let mu_min = symmetric_eigenvalues(&mu)[0];
    if mu_min <= 0.0 {
        return Err(Error::Certification {
            time: t,
            eigenvalue: mu_min,
            reason: "μ is not positive definite".into(),
        });
    }
    Ok(mu)
}

fn lyapunov_value(sample: &ProfileSample, mu: &Matrix6<f64>, xi: &Vector6<f64>, xi_dot: &Vector6<f64>, alpha: f64) -> f64 {
    let upsilon = xi_dot + xi * alpha;
    0.5 * (upsilon.dot(&(sample.inertia * upsilon)) + xi.dot(&(mu * xi)))
}

/// `V = ½(ΥᵀM_dΥ + ΞᵀμΞ)` with `Υ = Ξ̇ + αΞ`, and the rate bound
/// `V̇ = Ξ̇ᵀBΞ̇ + ½ΞᵀQΞ` used by the certification constraints.
///
/// The rate is the certificate's closed form. It is not the exact time
/// derivative of `V` along solutions of the unforced impedance model; see
/// [`lyapunov_rate_exact`].
pub fn lyapunov_certificate(
    xi: &Vector6<f64>,
    xi_dot: &Vector6<f64>,
    profile: &ImpedanceProfile,
    alpha: f64,
    t: f64,
) -> Result<LyapunovValue> {
    let s = eval_profile(profile, alpha, t)?;
    let mu = check_mu(&s, alpha, t)?;
    let v = lyapunov_value(&s, &mu, xi, xi_dot, alpha);
    let v_dot = xi_dot.dot(&(s.constraint_b(alpha) * xi_dot)) + 0.5 * xi.dot(&(s.constraint_q(alpha) * xi));
    Ok(LyapunovValue { v, v_dot })
}

/// Exact derivative of `V` along the unforced model `M_dΞ̈ + C_dΞ̇ + K_dΞ = 0`:
///
/// `V̇ = Ξ̇ᵀ(½Ṁ_d + αM_d − C_d)Ξ̇ + ½Ξᵀ(αĊ_d − αM̈_d + K̇_d − 2αK_d)Ξ`.
///
/// The cross terms cancel because of the choice of `μ`.
pub fn lyapunov_rate_exact(
    xi: &Vector6<f64>,
    xi_dot: &Vector6<f64>,
    profile: &ImpedanceProfile,
    alpha: f64,
    t: f64,
) -> Result<LyapunovValue> {
    let s = eval_profile(profile, alpha, t)?;
    let mu = check_mu(&s, alpha, t)?;
    let v = lyapunov_value(&s, &mu, xi, xi_dot, alpha);
    let vel = s.inertia_rate * 0.5 + s.inertia * alpha - s.damping;
    let pos = s.damping_rate * alpha - s.inertia_accel * alpha + s.stiffness_rate - s.stiffness * (2.0 * alpha);
    let v_dot = xi_dot.dot(&(vel * xi_dot)) + 0.5 * xi.dot(&(pos * xi));
    Ok(LyapunovValue { v, v_dot })
}

/// Impedance pulled back to configuration space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigurationImpedance {
    pub inertia: Matrix4<f64>,
    pub damping: Matrix4<f64>,
    pub stiffness: Matrix4<f64>,
    pub load: Vector4<f64>,
}

/// `M_c = J₁ᵀM_dJ₁`, `C_c = J₁ᵀM_dJ̇₁ + J₁ᵀC_dJ₁`, `K_c = J₁ᵀK_dJ₁`,
/// `τ_ext = J₁ᵀF_ext`.
pub fn map_to_configuration(
    sample: &ProfileSample,
    j1: &Matrix6x4<f64>,
    j1_dot: &Matrix6x4<f64>,
    force: &Vector6<f64>,
) -> ConfigurationImpedance {
    let jt = j1.transpose();
    ConfigurationImpedance {
        inertia: jt * sample.inertia * j1,
        damping: jt * sample.inertia * j1_dot + jt * sample.damping * j1,
        stiffness: jt * sample.stiffness * j1,
        load: jt * force,
    }
}

/// Regularization of the configuration-space admittance.
///
/// Near the straight pose the torsion columns of `J₁` vanish, so the mapped
/// matrices lose rank. For each mapped matrix `X_c = S + A` (symmetric plus
/// skew part) the eigenvalues of `S` are clamped from below at
/// `floor·tr(S)/4`, and `ridge·I` is added. Directions the task impedance
/// already controls are left unchanged; degenerate directions get a stiffness,
/// damping and inertia proportional to the average mapped value, which pins
/// the reference there instead of letting it drift with estimator noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmittanceSettings {
    pub floor: f64,
    pub ridge: f64,
}

impl Default for AdmittanceSettings {
    fn default() -> Self {
        Self {
            floor: 0.5,
            ridge: ADMITTANCE_RIDGE,
        }
    }
}

impl AdmittanceSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.floor.is_finite() && self.floor >= 0.0 && self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::config(format!(
                "admittance floor and ridge must be non-negative, got {} and {}",
                self.floor, self.ridge
            )));
        }
        Ok(())
    }

    fn apply(&self, m: &Matrix4<f64>) -> Matrix4<f64> {
        let sym = (m + m.transpose()) * 0.5;
        let skew = m - sym;
        let level = (self.floor * sym.trace() / 4.0).max(0.0);
        let eig = sym.symmetric_eigen();
        let clamped = eig.eigenvalues.map(|l| l.max(level) + self.ridge);
        eig.eigenvectors * Matrix4::from_diagonal(&clamped) * eig.eigenvectors.transpose() + skew
    }
}

impl ConfigurationImpedance {
    pub fn regularized(&self, settings: &AdmittanceSettings) -> ConfigurationImpedance {
        ConfigurationImpedance {
            inertia: settings.apply(&self.inertia),
            damping: settings.apply(&self.damping),
            stiffness: settings.apply(&self.stiffness),
            load: self.load,
        }
    }
}

/// Compliant reference `(Ω_r, Ω̇_r, Ω̈_r)` produced by the admittance loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceState {
    pub omega: Vector4<f64>,
    pub omega_dot: Vector4<f64>,
    pub omega_ddot: Vector4<f64>,
}

fn admittance_accel(
    chol: &nalgebra::Cholesky<f64, nalgebra::U4>,
    imp: &ConfigurationImpedance,
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    target: &Vector4<f64>,
) -> Vector4<f64> {
    chol.solve(&(imp.load - imp.damping * omega_dot - imp.stiffness * (omega - target)))
}

fn inertia_factor(imp: &ConfigurationImpedance) -> Result<nalgebra::Cholesky<f64, nalgebra::U4>> {
    let inertia = (imp.inertia + imp.inertia.transpose()) * 0.5;
    inertia
        .cholesky()
        .ok_or_else(|| Error::domain("configuration inertia is not positive definite"))
}

/// `Ω̈_r = M_c⁻¹(τ_ext − C_cΩ̇_r − K_c(Ω_r − Ω_d))`.
pub fn admittance_acceleration(
    imp: &ConfigurationImpedance,
    omega: &Vector4<f64>,
    omega_dot: &Vector4<f64>,
    target: &Vector4<f64>,
) -> Result<Vector4<f64>> {
    Ok(admittance_accel(&inertia_factor(imp)?, imp, omega, omega_dot, target))
}

/// Advances `M_cΩ̈_r + C_cΩ̇_r + K_c(Ω_r − Ω_d) = τ_ext` by one RK4 step with the
/// matrices held constant over the step. `imp` is used as given; regularize
/// it first with [`ConfigurationImpedance::regularized`].
pub fn compliant_reference_step(
    imp: &ConfigurationImpedance,
    state: &ReferenceState,
    target: &Vector4<f64>,
    dt: f64,
) -> Result<ReferenceState> {
    let chol = inertia_factor(imp)?;
    let f = |w: &Vector4<f64>, wd: &Vector4<f64>| (*wd, admittance_accel(&chol, imp, w, wd, target));
    let (k1w, k1v) = f(&state.omega, &state.omega_dot);
    let (k2w, k2v) = f(&(state.omega + k1w * (dt / 2.0)), &(state.omega_dot + k1v * (dt / 2.0)));
    let (k3w, k3v) = f(&(state.omega + k2w * (dt / 2.0)), &(state.omega_dot + k2v * (dt / 2.0)));
    let (k4w, k4v) = f(&(state.omega + k3w * dt), &(state.omega_dot + k3v * dt));
    let omega = state.omega + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (dt / 6.0);
    let omega_dot = state.omega_dot + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    let omega_ddot = admittance_accel(&chol, imp, &omega, &omega_dot, target);
    Ok(ReferenceState {
        omega,
        omega_dot,
        omega_ddot,
    })
}

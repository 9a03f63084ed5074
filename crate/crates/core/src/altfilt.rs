//! Attitude-only filters: a PI complementary filter driven by gravity and
//! heading references, and a gradient-descent quaternion filter driven by
//! accelerometer and magnetometer directions.

use nalgebra::{Matrix3, Matrix3x4, Vector4};
use thiserror::Error;

use crate::geom::{quat_to_dcm, rot_x, rot_y, rot_z, skew, Quaternion, Vec3};
use crate::mech::{attitude_update, MechError, NavState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AltFiltError {
    #[error("reference vector has zero length")]
    ZeroVector,
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Mech(#[from] MechError),
}

/// Compensator gains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiGains {
    /// Proportional gain, 1/s.
    pub kp: f64,
    /// Integral gain, 1/s².
    pub ki: f64,
}

impl Default for PiGains {
    fn default() -> Self {
        Self { kp: 1.0, ki: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompFilterState {
    pub q: Quaternion,
    /// Estimated gyro bias, rad/s.
    pub bias_estimate: Vec3,
    /// Integral of the attitude error, rad·s.
    pub integrator: Vec3,
}

impl CompFilterState {
    pub fn new(q: Quaternion) -> Self {
        Self { q, bias_estimate: Vec3::zeros(), integrator: Vec3::zeros() }
    }
}

/// Body-frame attitude error and whether the gravity reference was usable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeError {
    pub e: Vec3,
    /// Set when the gravity reference was too short and only the heading
    /// term contributed.
    pub degenerate: bool,
}

/// Gravity direction in body axes with the centripetal term removed:
/// `w × v_ref − f`.
pub fn gravity_reference(w: &Vec3, v_ref_body: &Vec3, f: &Vec3) -> Vec3 {
    w.cross(v_ref_body) - f
}

/// Sum of the gravity and heading cross-product errors for estimate `q_hat`.
pub fn attitude_error(q_hat: &Quaternion, psi_ref: f64, g_ref: &Vec3, g_bar: f64) -> AttitudeError {
    let c_nb = quat_to_dcm(q_hat).0.transpose();
    let est = crate::geom::dcm_to_euler(&crate::geom::Dcm(c_nb.transpose()));
    let north_ref = rot_x(est.roll) * rot_y(est.pitch) * rot_z(psi_ref) * Vec3::x();
    let north_est = c_nb * Vec3::x();
    let e_psi = north_ref.cross(&north_est);
    let gn = g_ref.norm();
    if gn < 0.1 * g_bar {
        return AttitudeError { e: e_psi, degenerate: true };
    }
    let down_est = c_nb * Vec3::z();
    let e_g = (g_ref / gn).cross(&down_est);
    AttitudeError { e: e_g + e_psi, degenerate: false }
}

/// One complementary-filter step. Returns the new state and whether the
/// gravity reference was degenerate.
#[allow(clippy::too_many_arguments)]
pub fn comp_step(
    state: &CompFilterState,
    w_gyro: &Vec3,
    f_accel: &Vec3,
    v_ref: &Vec3,
    psi_ref: f64,
    gains: &PiGains,
    dt: f64,
    g_bar: f64,
) -> Result<(CompFilterState, bool), AltFiltError> {
    if !(dt > 0.0) {
        return Err(AltFiltError::BadStep(dt));
    }
    let g_ref = gravity_reference(w_gyro, v_ref, f_accel);
    let err = attitude_error(&state.q, psi_ref, &g_ref, g_bar);
    let integrator = state.integrator + err.e * dt;
    let bias_estimate = -(err.e * gains.kp + integrator * gains.ki);
    let nav = NavState { q: state.q, ..Default::default() };
    let q = attitude_update(&nav, &((w_gyro - bias_estimate) * dt))?.q;
    Ok((CompFilterState { q, bias_estimate, integrator }, err.degenerate))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdFilterState {
    pub q: Quaternion,
    /// Gradient-step gain, rad/s.
    pub beta: f64,
}

/// Navigation-frame direction of gravity.
pub const GRAVITY_DIRECTION: Vec3 = Vec3::new(0.0, 0.0, 1.0);

/// Unit magnetic-field direction in NED for a given inclination (dip),
/// positive downward.
pub fn magnetic_reference(inclination: f64) -> Vec3 {
    Vec3::new(inclination.cos(), 0.0, inclination.sin())
}

/// Residual between the reference `d_ref` expressed in body axes by `q` and
/// the measured direction `s`.
pub fn gd_objective(q: &Quaternion, d_ref: &Vec3, s: &Vec3) -> Result<Vec3, AltFiltError> {
    if s.norm() == 0.0 {
        return Err(AltFiltError::ZeroVector);
    }
    let sandwich = q.conjugate() * Quaternion::from_parts(0.0, *d_ref) * *q;
    Ok(sandwich.vector() - s)
}

/// Derivative of `quat_to_dcm(q)` with respect to each component.
fn dcm_partials(q: &Quaternion) -> [Matrix3<f64>; 4] {
    let qv = q.vector();
    let mut out = [2.0 * q.q0 * Matrix3::identity() + 2.0 * skew(&qv); 4];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut e = Vec3::zeros();
        e[k - 1] = 1.0;
        *slot = -2.0 * qv[k - 1] * Matrix3::identity() + 2.0 * (e * qv.transpose() + qv * e.transpose()) + 2.0 * q.q0 * skew(&e);
    }
    out
}

/// Jacobian of [`gd_objective`] with respect to `(q0, q1, q2, q3)`.
pub fn gd_jacobian(q: &Quaternion, d_ref: &Vec3) -> Matrix3x4<f64> {
    let parts = dcm_partials(q);
    let mut j = Matrix3x4::zeros();
    for (k, dr) in parts.iter().enumerate() {
        j.set_column(k, &(dr.transpose() * d_ref));
    }
    j
}

/// Flags raised by [`gd_step`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GdFlags {
    /// Accelerometer and magnetometer directions were parallel, so only
    /// the gravity term was used.
    pub heading_unobservable: bool,
}

/// Gradient of the stacked accelerometer and magnetometer objective.
pub fn gd_gradient(q: &Quaternion, f_accel: &Vec3, m_mag: &Vec3, mag_ref: &Vec3) -> Result<(Vector4<f64>, GdFlags), AltFiltError> {
    let fa = f_accel.norm();
    let mm = m_mag.norm();
    if fa == 0.0 || mm == 0.0 {
        return Err(AltFiltError::ZeroVector);
    }
    let s_a = -f_accel / fa;
    let s_m = m_mag / mm;
    let f_a = gd_objective(q, &GRAVITY_DIRECTION, &s_a)?;
    let mut grad = gd_jacobian(q, &GRAVITY_DIRECTION).transpose() * f_a;
    let heading_unobservable = s_a.cross(&s_m).norm() < 1e-6;
    if !heading_unobservable {
        let f_m = gd_objective(q, mag_ref, &s_m)?;
        grad += gd_jacobian(q, mag_ref).transpose() * f_m;
    }
    Ok((grad, GdFlags { heading_unobservable }))
}

/// Stacked objective value `½(‖f_a‖² + ‖f_m‖²)`.
pub fn gd_cost(q: &Quaternion, f_accel: &Vec3, m_mag: &Vec3, mag_ref: &Vec3) -> Result<f64, AltFiltError> {
    let s_a = -f_accel.normalize();
    let s_m = m_mag.normalize();
    let a = gd_objective(q, &GRAVITY_DIRECTION, &s_a)?;
    let m = gd_objective(q, mag_ref, &s_m)?;
    Ok(0.5 * (a.norm_squared() + m.norm_squared()))
}

/// One gradient-descent filter step: gyro quaternion rate minus the
/// normalized objective gradient scaled by β, Euler-integrated.
pub fn gd_step(
    state: &GdFilterState,
    w_gyro: &Vec3,
    f_accel: &Vec3,
    m_mag: &Vec3,
    mag_ref: &Vec3,
    dt: f64,
) -> Result<(GdFilterState, GdFlags), AltFiltError> {
    if !(dt > 0.0) {
        return Err(AltFiltError::BadStep(dt));
    }
    let q = state.q;
    let rate = (q * Quaternion::from_parts(0.0, *w_gyro)).scale(0.5);
    let (grad, flags) = gd_gradient(&q, f_accel, m_mag, mag_ref)?;
    let gn = grad.norm();
    let qdot = if gn > 0.0 && state.beta > 0.0 {
        let g = grad * (state.beta / gn);
        rate.add(&Quaternion::new(-g[0], -g[1], -g[2], -g[3]))
    } else {
        rate
    };
    let q = q.add(&qdot.scale(dt)).normalized();
    Ok((GdFilterState { q, beta: state.beta }, flags))
}

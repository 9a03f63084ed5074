//! Strapdown mechanization at the m-rate.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

use crate::geom::{quat_normalize, quat_to_dcm, Dcm, EulerAngles, GeomError, Quaternion, Vec3};

/// Latitude margin from the poles inside which east-rate terms blow up.
pub const POLAR_MARGIN: f64 = 1e-6;

/// Rotation-vector magnitude above which the update-quaternion series loses
/// accuracy.
pub const SMALL_ANGLE_LIMIT: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechError {
    #[error("latitude {0} rad is within {POLAR_MARGIN} rad of a pole")]
    PolarSingularity(f64),
    #[error("attitude integration diverged: {0}")]
    Diverged(#[from] GeomError),
}

/// Spherical Earth and constant gravity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EarthModel {
    /// Radius, m.
    pub r: f64,
    /// Gravity magnitude, m/s².
    pub g_bar: f64,
    /// Rotation rate, rad/s.
    pub omega_e: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self { r: 6.37e6, g_bar: 9.80665, omega_e: 7.292115e-5 }
    }
}

/// Total-state navigation solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavState {
    /// Latitude, rad.
    pub lat: f64,
    /// Longitude, rad.
    pub lon: f64,
    /// Altitude, m, positive up.
    pub h: f64,
    /// NED velocity, m/s.
    pub v: Vec3,
    /// Body-to-NED attitude.
    pub q: Quaternion,
}

impl Default for NavState {
    fn default() -> Self {
        Self { lat: 0.0, lon: 0.0, h: 0.0, v: Vec3::zeros(), q: Quaternion::IDENTITY }
    }
}

impl NavState {
    pub fn dcm(&self) -> Dcm {
        quat_to_dcm(&self.q)
    }

    pub fn euler(&self) -> EulerAngles {
        crate::geom::quat_to_euler(&self.q)
    }
}

/// Mechanization switches.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MechConfig {
    /// Include Coriolis and transport-rate terms in velocity integration.
    pub full_coriolis: bool,
}

/// Result of one [`mech_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechStep {
    pub nav: NavState,
    /// Gravity-compensated NED velocity increment of this step.
    pub dv_ned: Vec3,
    /// Set when `‖φ_m‖` exceeded [`SMALL_ANGLE_LIMIT`].
    pub large_angle: bool,
}

/// Rotates a body velocity increment into NED and removes the gravity
/// reaction.
pub fn transform_dv(c: &Dcm, dv_body: &Vec3, dt_m: f64, earth: &EarthModel) -> Vec3 {
    let mut dv = c.apply(dv_body);
    dv.z += earth.g_bar * dt_m;
    dv
}

pub fn integrate_velocity(state: &NavState, dv_ned: &Vec3) -> NavState {
    NavState { v: state.v + dv_ned, ..*state }
}

fn check_latitude(lat: f64) -> Result<(), MechError> {
    if lat.abs() >= FRAC_PI_2 - POLAR_MARGIN || !lat.is_finite() {
        Err(MechError::PolarSingularity(lat))
    } else {
        Ok(())
    }
}

fn wrap_lon(lon: f64) -> f64 {
    if lon > PI || lon <= -PI {
        let w = (lon + PI).rem_euclid(TAU) - PI;
        if w == -PI {
            PI
        } else {
            w
        }
    } else {
        lon
    }
}

fn advance_position(state: &NavState, v: &Vec3, dt: f64, earth: &EarthModel) -> Result<NavState, MechError> {
    check_latitude(state.lat)?;
    let lat = state.lat + v.x / earth.r * dt;
    let lon = wrap_lon(state.lon + v.y / (earth.r * state.lat.cos()) * dt);
    let h = state.h - v.z * dt;
    Ok(NavState { lat, lon, h, ..*state })
}

/// Advances latitude, longitude and altitude with the state's velocity.
pub fn integrate_position(state: &NavState, dt_m: f64, earth: &EarthModel) -> Result<NavState, MechError> {
    advance_position(state, &state.v, dt_m, earth)
}

/// Update quaternion for a small rotation vector, from the fourth-order
/// series of the half-angle functions.
pub fn update_quaternion(phi: &Vec3) -> Quaternion {
    let d2 = phi.norm_squared();
    let d4 = d2 * d2;
    let s = 0.5 - d2 / 48.0 + d4 / 3840.0;
    let c = -d2 / 8.0 + d4 / 384.0;
    Quaternion::from_parts(1.0 + c, phi * s)
}

/// `q ← q ⊗ dΛ(φ_m)` followed by first-order normalization.
pub fn attitude_update(state: &NavState, phi_m: &Vec3) -> Result<NavState, MechError> {
    let q = state.q * update_quaternion(phi_m);
    Ok(NavState { q: quat_normalize(&q)?, ..*state })
}

/// One m-cycle: attitude, velocity and position.
///
/// `dv_m` is expressed in the body frame at the start of the interval, so it
/// is rotated with the attitude held before this step's update. Position
/// uses the mean of the old and new velocity.
pub fn mech_step(
    state: &NavState,
    phi_m: &Vec3,
    dv_m: &Vec3,
    dt_m: f64,
    earth: &EarthModel,
    cfg: &MechConfig,
) -> Result<MechStep, MechError> {
    check_latitude(state.lat)?;
    let c_prev = state.dcm();
    let after_att = attitude_update(state, phi_m)?;
    let mut dv_ned = transform_dv(&c_prev, dv_m, dt_m, earth);
    if cfg.full_coriolis {
        dv_ned -= coriolis_rate(state, earth) * dt_m;
    }
    let after_vel = integrate_velocity(&after_att, &dv_ned);
    let v_mean = (state.v + after_vel.v) * 0.5;
    let nav = advance_position(&after_vel, &v_mean, dt_m, earth)?;
    Ok(MechStep { nav, dv_ned, large_angle: phi_m.norm() >= SMALL_ANGLE_LIMIT })
}

/// Earth rate in NED.
pub fn earth_rate_ned(lat: f64, earth: &EarthModel) -> Vec3 {
    Vec3::new(earth.omega_e * lat.cos(), 0.0, -earth.omega_e * lat.sin())
}

/// Transport rate `ω_en^n` for a spherical Earth.
pub fn transport_rate(state: &NavState, earth: &EarthModel) -> Vec3 {
    let (vn, ve) = (state.v.x, state.v.y);
    Vec3::new(ve / earth.r, -vn / earth.r, -ve * state.lat.tan() / earth.r)
}

/// `(2ω_ie + ω_en) × v`.
pub fn coriolis_rate(state: &NavState, earth: &EarthModel) -> Vec3 {
    (earth_rate_ned(state.lat, earth) * 2.0 + transport_rate(state, earth)).cross(&state.v)
}

//! Ground-truth trajectories, sensor-error corruption and GNSS synthesis.
//!
//! Truth kinematics are flat-Earth with constant gravity and no Earth
//! rotation, matching the mechanization's own approximations. IMU rows carry
//! the interval-mean angular rate and specific force over `(t − dT, t]`, so
//! `rate · dT` is the exact angular or velocity increment an integrating
//! sensor would report (exact for the angle; exact to quadrature accuracy
//! for velocity).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::eskf::GnssFix;
use crate::geom::{euler_to_quat, quat_to_dcm, rotvec_to_quat, EulerAngles, Quaternion, RotationVector, Vec3};
use crate::imu::RawImuSample;
use crate::mech::{EarthModel, NavState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid specification: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::Invalid(msg.into()))
}

/// Motion profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrajectoryKind {
    Stationary,
    /// Constant body rate `rate` (rad/s) about the body axis `axis`.
    ConstantRate { axis: Vec3, rate: f64 },
    /// Classic coning: body z sweeps a cone of half-angle `amplitude` (rad)
    /// at `frequency` (rad/s).
    Coning { amplitude: f64, frequency: f64 },
    /// Roll oscillation `θ·sin Ωt` with in-phase east acceleration `A·sin Ωt`.
    Sculling { angle_amplitude: f64, accel_amplitude: f64, frequency: f64 },
    /// Level constant-speed circle, turning right.
    Circular { radius: f64, speed: f64 },
    /// Constant NED acceleration inside `[start, start + duration)`, fixed
    /// attitude.
    Accelerate { accel: Vec3, start: f64, duration: f64 },
}

/// Starting point of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct InitialPose {
    pub lat: f64,
    pub lon: f64,
    pub h: f64,
    pub attitude: EulerAngles,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Seconds.
    pub duration: f64,
    /// IMU sample rate, Hz.
    pub rate: f64,
    pub initial: InitialPose,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return invalid(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return invalid(format!("rate must be positive, got {}", self.rate));
        }
        if !(self.initial.lat.abs() < PI / 2.0 - 1e-6) {
            return invalid("initial latitude must be inside (-pi/2, pi/2)");
        }
        match self.kind {
            TrajectoryKind::Stationary => {}
            TrajectoryKind::ConstantRate { axis, rate } => {
                if !(axis.norm() > 0.0) || !rate.is_finite() {
                    return invalid("constant-rate axis must be nonzero and rate finite");
                }
            }
            TrajectoryKind::Coning { amplitude, frequency } => {
                if !(frequency > 0.0) || !amplitude.is_finite() {
                    return invalid("coning frequency must be positive");
                }
            }
            TrajectoryKind::Sculling { angle_amplitude, accel_amplitude, frequency } => {
                if !(frequency > 0.0) || !angle_amplitude.is_finite() || !accel_amplitude.is_finite() {
                    return invalid("sculling frequency must be positive");
                }
            }
            TrajectoryKind::Circular { radius, speed } => {
                if !(radius > 0.0) || !(speed >= 0.0) {
                    return invalid("circle radius must be positive and speed non-negative");
                }
            }
            TrajectoryKind::Accelerate { accel, start, duration } => {
                if !accel.iter().all(|a| a.is_finite()) || !(start >= 0.0) || !(duration >= 0.0) {
                    return invalid("acceleration window must be finite and non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration * self.rate).round() as usize
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }
}

/// One truth epoch. `w` and `f` are interval means over `(t − dT, t]`; at
/// `t = 0` they are the instantaneous values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub nav: NavState,
    pub w: Vec3,
    pub f: Vec3,
}

/// Instantaneous kinematics relative to the start point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub q: Quaternion,
    /// Body angular rate, rad/s.
    pub w: Vec3,
    /// NED displacement from the start, m.
    pub pos: Vec3,
    pub v: Vec3,
    pub a: Vec3,
}

#[allow(clippy::excessive_precision)]
const GL_NODES: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

/// Mean of `g` over `[a, b]` by 8-point Gauss–Legendre quadrature.
fn gl_mean<F: Fn(f64) -> Vec3>(a: f64, b: f64, g: F) -> Vec3 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Vec3::zeros();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += (g(mid - half * x) + g(mid + half * x)) * w;
    }
    acc * 0.5
}

fn coning_quat(amplitude: f64, frequency: f64, t: f64) -> Quaternion {
    let (s, c) = (0.5 * amplitude).sin_cos();
    let (sw, cw) = (frequency * t).sin_cos();
    Quaternion::new(c, 0.0, s * cw, s * sw)
}

/// Closed-form kinematics of `spec` at time `t`.
pub fn kinematics(spec: &TrajectorySpec, t: f64) -> Kinematics {
    let q0 = euler_to_quat(&spec.initial.attitude);
    let zero = Vec3::zeros();
    match spec.kind {
        TrajectoryKind::Stationary => Kinematics { q: q0, w: zero, pos: zero, v: zero, a: zero },
        TrajectoryKind::ConstantRate { axis, rate } => {
            let u = axis.normalize();
            let q = q0 * rotvec_to_quat(&RotationVector(u * (rate * t)));
            Kinematics { q, w: u * rate, pos: zero, v: zero, a: zero }
        }
        TrajectoryKind::Coning { amplitude, frequency: om } => {
            let q = q0 * coning_quat(amplitude, om, 0.0).conjugate() * coning_quat(amplitude, om, t);
            let (sw, cw) = (om * t).sin_cos();
            let s2 = (0.5 * amplitude).sin().powi(2);
            let sa = amplitude.sin();
            let w = Vec3::new(-2.0 * om * s2, -om * sa * sw, om * sa * cw);
            Kinematics { q, w, pos: zero, v: zero, a: zero }
        }
        TrajectoryKind::Sculling { angle_amplitude: th, accel_amplitude: acc, frequency: om } => {
            let (sw, cw) = (om * t).sin_cos();
            let q = q0 * rotvec_to_quat(&RotationVector::new(th * sw, 0.0, 0.0));
            let w = Vec3::new(th * om * cw, 0.0, 0.0);
            let a = Vec3::new(0.0, acc * sw, 0.0);
            let v = Vec3::new(0.0, acc * (1.0 - cw) / om, 0.0);
            let pos = Vec3::new(0.0, acc * (t - sw / om) / om, 0.0);
            Kinematics { q, w, pos, v, a }
        }
        TrajectoryKind::Circular { radius, speed } => {
            let om = speed / radius;
            let psi0 = spec.initial.attitude.heading;
            let psi = psi0 + om * t;
            let q = rotvec_to_quat(&RotationVector::new(0.0, 0.0, om * t)) * q0;
            let w = quat_to_dcm(&q0).0.transpose() * Vec3::new(0.0, 0.0, om);
            let (sp, cp) = psi.sin_cos();
            let v = Vec3::new(speed * cp, speed * sp, 0.0);
            let a = Vec3::new(-speed * om * sp, speed * om * cp, 0.0);
            let pos = Vec3::new(radius * (sp - psi0.sin()), -radius * (cp - psi0.cos()), 0.0);
            Kinematics { q, w, pos, v, a }
        }
        TrajectoryKind::Accelerate { accel, start, duration } => {
            let tau = (t - start).clamp(0.0, duration);
            let coast = (t - start - duration).max(0.0);
            let v = accel * tau;
            let pos = accel * (0.5 * tau * tau) + accel * (duration * coast);
            let a = if t >= start && t < start + duration { accel } else { zero };
            Kinematics { q: q0, w: zero, pos, v, a }
        }
    }
}

fn specific_force(k: &Kinematics, earth: &EarthModel) -> Vec3 {
    quat_to_dcm(&k.q).0.transpose() * (k.a - Vec3::new(0.0, 0.0, earth.g_bar))
}

fn constant_attitude(kind: &TrajectoryKind) -> bool {
    matches!(kind, TrajectoryKind::Stationary | TrajectoryKind::Accelerate { .. })
}

/// Truth epochs `k = 0..=N` at `t = k/rate`.
pub fn gen_truth(spec: &TrajectorySpec, earth: &EarthModel) -> Result<Vec<TruthSample>, SimError> {
    spec.validate()?;
    let n = spec.samples();
    let dt = spec.dt();
    let init = spec.initial;
    let r = earth.r;
    let lat_of = |pos: &Vec3| init.lat + pos.x / r;
    let east_rate = |t: f64| {
        let k = kinematics(spec, t);
        Vec3::new(k.v.y / (r * lat_of(&k.pos).cos()), 0.0, 0.0)
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut lon = init.lon;
    let mut prev_t = 0.0;
    for i in 0..=n {
        let t = i as f64 * dt;
        let k = kinematics(spec, t);
        let (w, f) = if i == 0 {
            (k.w, specific_force(&k, earth))
        } else {
            lon += gl_mean(prev_t, t, east_rate).x * (t - prev_t);
            let w = gl_mean(prev_t, t, |s| kinematics(spec, s).w);
            let f = if constant_attitude(&spec.kind) {
                let v0 = kinematics(spec, prev_t).v;
                quat_to_dcm(&k.q).0.transpose() * ((k.v - v0) / (t - prev_t) - Vec3::new(0.0, 0.0, earth.g_bar))
            } else {
                gl_mean(prev_t, t, |s| specific_force(&kinematics(spec, s), earth))
            };
            (w, f)
        };
        let nav = NavState { lat: lat_of(&k.pos), lon, h: init.h - k.pos.z, v: k.v, q: k.q };
        out.push(TruthSample { t, nav, w, f });
        prev_t = t;
    }
    Ok(out)
}

/// Error terms for one sensor triad, SI units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AxisErrors {
    /// Constant bias (rad/s or m/s²).
    pub bias: Vec3,
    /// White-noise density (rad/√s or m/s/√s).
    pub white: Vec3,
    /// Gauss–Markov bias-instability standard deviation.
    pub instability: Vec3,
    /// Gauss–Markov correlation time, s. Non-positive disables the process.
    pub tau: f64,
    /// Random-walk coefficient of the bias (rad/s/√s or m/s²/√s).
    pub random_walk: Vec3,
}

/// Gyro errors in datasheet units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GyroDatasheet {
    pub bias_deg_per_hr: Vec3,
    pub arw_deg_per_rt_hr: Vec3,
    pub instability_deg_per_hr: Vec3,
    pub tau_s: f64,
    pub rrw_deg_per_hr_per_rt_hr: Vec3,
}

/// Accelerometer errors in datasheet units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AccelDatasheet {
    pub bias: Vec3,
    pub vrw_per_rt_hz: Vec3,
    pub instability: Vec3,
    pub tau_s: f64,
    pub random_walk: Vec3,
}

impl From<GyroDatasheet> for AxisErrors {
    fn from(d: GyroDatasheet) -> Self {
        use crate::units::Unit;
        let conv = |v: Vec3, u: Unit| v.map(|x| u.to_si(x));
        AxisErrors {
            bias: conv(d.bias_deg_per_hr, Unit::DegPerHour),
            white: conv(d.arw_deg_per_rt_hr, Unit::DegPerRootHour),
            instability: conv(d.instability_deg_per_hr, Unit::DegPerHour),
            tau: d.tau_s,
            random_walk: conv(d.rrw_deg_per_hr_per_rt_hr, Unit::DegPerHourPerRootHour),
        }
    }
}

impl From<AccelDatasheet> for AxisErrors {
    fn from(d: AccelDatasheet) -> Self {
        AxisErrors { bias: d.bias, white: d.vrw_per_rt_hz, instability: d.instability, tau: d.tau_s, random_walk: d.random_walk }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SensorErrorSpec {
    pub gyro: AxisErrors,
    pub accel: AxisErrors,
    pub seed: u64,
}

impl SensorErrorSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, a) in [("gyro", &self.gyro), ("accel", &self.accel)] {
            let noise = a.white.iter().chain(a.instability.iter()).chain(a.random_walk.iter());
            if !noise.clone().all(|x| *x >= 0.0 && x.is_finite()) {
                return invalid(format!("{name} noise magnitudes must be non-negative"));
            }
            if !a.bias.iter().all(|x| x.is_finite()) || !a.tau.is_finite() {
                return invalid(format!("{name} bias and correlation time must be finite"));
            }
        }
        Ok(())
    }
}

/// IMU sample stamped with the end of its interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuRecord {
    pub t: f64,
    pub sample: RawImuSample,
}

struct TriadNoise {
    spec: AxisErrors,
    gm: Vec3,
    rw: Vec3,
}

impl TriadNoise {
    fn new(spec: AxisErrors, rng: &mut ChaCha8Rng) -> Self {
        let gm = if spec.tau > 0.0 { spec.instability.map(|s| s * normal(rng)) } else { Vec3::zeros() };
        Self { spec, gm, rw: Vec3::zeros() }
    }

    fn sample(&mut self, dt: f64, rng: &mut ChaCha8Rng) -> Vec3 {
        let white = self.spec.white.map(|d| d / dt.sqrt() * normal(rng));
        let total = self.spec.bias + white + self.gm + self.rw;
        let gm_draw = Vec3::new(normal(rng), normal(rng), normal(rng));
        if self.spec.tau > 0.0 {
            let phi = (-dt / self.spec.tau).exp();
            let drive = (1.0 - phi * phi).sqrt();
            self.gm = self.gm * phi + self.spec.instability.component_mul(&gm_draw) * drive;
        }
        let rw_draw = Vec3::new(normal(rng), normal(rng), normal(rng));
        self.rw += self.spec.random_walk.component_mul(&rw_draw) * dt.sqrt();
        total
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

const IMU_STREAM: u64 = 1;
const GNSS_STREAM: u64 = 2;
const MAG_STREAM: u64 = 3;
const HEADING_STREAM: u64 = 4;

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Adds sensor errors to the truth IMU rows `k = 1..=N`.
pub fn corrupt_imu(truth: &[TruthSample], spec: &SensorErrorSpec) -> Result<Vec<ImuRecord>, SimError> {
    spec.validate()?;
    let mut rng = seeded(spec.seed, IMU_STREAM);
    let mut gyro = TriadNoise::new(spec.gyro, &mut rng);
    let mut accel = TriadNoise::new(spec.accel, &mut rng);
    truth
        .windows(2)
        .map(|pair| {
            let dt = pair[1].t - pair[0].t;
            let w = pair[1].w + gyro.sample(dt, &mut rng);
            let f = pair[1].f + accel.sample(dt, &mut rng);
            let sample = RawImuSample::new(w, f, dt).map_err(|e| SimError::Invalid(e.to_string()))?;
            Ok(ImuRecord { t: pair[1].t, sample })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnssSpec {
    /// Fix rate, Hz.
    pub rate: f64,
    /// Position noise, m, NED.
    pub pos_sigma: Vec3,
    /// Velocity noise, m/s, NED.
    pub vel_sigma: Vec3,
    /// Added to every timestamp, s.
    pub skew: f64,
}

impl Default for GnssSpec {
    fn default() -> Self {
        Self { rate: 1.0, pos_sigma: Vec3::zeros(), vel_sigma: Vec3::zeros(), skew: 0.0 }
    }
}

impl GnssSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return invalid(format!("GNSS rate must be positive, got {}", self.rate));
        }
        if !self.pos_sigma.iter().chain(self.vel_sigma.iter()).all(|s| *s >= 0.0 && s.is_finite()) {
            return invalid("GNSS sigmas must be non-negative");
        }
        if !self.skew.is_finite() {
            return invalid("GNSS skew must be finite");
        }
        Ok(())
    }
}

/// Fixes at multiples of `1/rate` (excluding `t = 0`), each carrying the
/// truth at its epoch but stamped `t + skew`.
pub fn gen_gnss(truth: &[TruthSample], spec: &GnssSpec, seed: u64, earth: &EarthModel) -> Result<Vec<GnssFix>, SimError> {
    spec.validate()?;
    let Some(last) = truth.last() else { return Ok(Vec::new()) };
    if truth.len() < 2 {
        return Ok(Vec::new());
    }
    let dt = truth[1].t - truth[0].t;
    let mut rng = seeded(seed, GNSS_STREAM);
    let mut out = Vec::new();
    let mut j = 1u64;
    loop {
        let t = j as f64 / spec.rate;
        if t > last.t + 0.5 * dt {
            break;
        }
        let idx = ((t - truth[0].t) / dt).round() as usize;
        let nav = truth[idx.min(truth.len() - 1)].nav;
        let np = spec.pos_sigma.map(|s| s * normal(&mut rng));
        let nv = spec.vel_sigma.map(|s| s * normal(&mut rng));
        out.push(GnssFix {
            t: t + spec.skew,
            lat: nav.lat + np.x / earth.r,
            lon: nav.lon + np.y / (earth.r * nav.lat.cos()),
            h: nav.h - np.z,
            v: nav.v + nv,
        });
        j += 1;
    }
    Ok(out)
}

/// Body-frame unit magnetometer readings along a truth sequence, one per
/// IMU row, with isotropic white noise of standard deviation `sigma`.
pub fn gen_magnetometer(truth: &[TruthSample], field_ned: &Vec3, sigma: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = seeded(seed, MAG_STREAM);
    truth
        .iter()
        .skip(1)
        .map(|s| {
            let n = Vec3::new(normal(&mut rng), normal(&mut rng), normal(&mut rng));
            quat_to_dcm(&s.nav.q).0.transpose() * field_ned + n * sigma
        })
        .collect()
}

/// Heading reference: truth heading plus white noise, one per IMU row.
pub fn gen_heading_reference(truth: &[TruthSample], sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, HEADING_STREAM);
    truth.iter().skip(1).map(|s| s.nav.euler().heading + sigma * normal(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(kind: TrajectoryKind) -> TrajectorySpec {
        TrajectorySpec { kind, duration: 2.0, rate: 100.0, initial: InitialPose::default() }
    }

    #[test]
    fn stationary_truth() {
        let e = EarthModel::default();
        let t = gen_truth(&spec(TrajectoryKind::Stationary), &e).unwrap();
        assert_eq!(t.len(), 201);
        for s in &t {
            assert_eq!(s.w, Vec3::zeros());
            assert_abs_diff_eq!(s.f, Vec3::new(0.0, 0.0, -e.g_bar), epsilon = 1e-15);
        }
    }

    #[test]
    fn constant_yaw_heading_is_linear() {
        let rate = 10f64.to_radians();
        let sp = TrajectorySpec { duration: 9.0, ..spec(TrajectoryKind::ConstantRate { axis: Vec3::z(), rate }) };
        let t = gen_truth(&sp, &EarthModel::default()).unwrap();
        for s in t.iter().step_by(50).take(17) {
            let h = s.nav.euler().heading.to_degrees();
            assert_abs_diff_eq!(h, 10.0 * s.t, epsilon = 1e-9);
        }
    }

    #[test]
    fn coning_rate_matches_quaternion_derivative() {
        let sp = spec(TrajectoryKind::Coning { amplitude: 0.3, frequency: 5.0 });
        for t in [0.0, 0.13, 0.77, 1.5] {
            let h = 1e-6;
            let qa = kinematics(&sp, t - h).q;
            let qb = kinematics(&sp, t + h).q;
            let q = kinematics(&sp, t).q;
            let qdot = qb.add(&qa.scale(-1.0)).scale(0.5 / h);
            let w = (q.conjugate() * qdot).vector() * 2.0;
            assert_abs_diff_eq!(w, kinematics(&sp, t).w, epsilon = 1e-7);
        }
    }

    #[test]
    fn circular_kinematics_are_consistent() {
        let sp = spec(TrajectoryKind::Circular { radius: 100.0, speed: 10.0 });
        let h = 1e-5;
        for t in [0.3, 1.1] {
            let k = kinematics(&sp, t);
            let dp = (kinematics(&sp, t + h).pos - kinematics(&sp, t - h).pos) / (2.0 * h);
            let dv = (kinematics(&sp, t + h).v - kinematics(&sp, t - h).v) / (2.0 * h);
            assert_abs_diff_eq!(dp, k.v, epsilon = 1e-6);
            assert_abs_diff_eq!(dv, k.a, epsilon = 1e-6);
            assert_abs_diff_eq!(k.a.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_error_spec_reproduces_truth() {
        let t = gen_truth(&spec(TrajectoryKind::Coning { amplitude: 0.01, frequency: 20.0 }), &EarthModel::default()).unwrap();
        let imu = corrupt_imu(&t, &SensorErrorSpec::default()).unwrap();
        assert_eq!(imu.len(), t.len() - 1);
        for (r, s) in imu.iter().zip(&t[1..]) {
            assert_eq!(r.sample.w, s.w);
            assert_eq!(r.sample.f, s.f);
            assert_eq!(r.t, s.t);
        }
    }

    #[test]
    fn constant_bias_is_mean_offset() {
        let t = gen_truth(&spec(TrajectoryKind::Stationary), &EarthModel::default()).unwrap();
        let b = 0.1f64.to_radians();
        let e = SensorErrorSpec { gyro: AxisErrors { bias: Vec3::new(b, 0.0, 0.0), ..Default::default() }, ..Default::default() };
        let imu = corrupt_imu(&t, &e).unwrap();
        let mean = imu.iter().map(|r| r.sample.w.x).sum::<f64>() / imu.len() as f64;
        assert_abs_diff_eq!(mean, b, epsilon = 1e-15);
    }

    #[test]
    fn corruption_is_deterministic_per_seed() {
        let t = gen_truth(&spec(TrajectoryKind::Stationary), &EarthModel::default()).unwrap();
        let e = SensorErrorSpec {
            gyro: AxisErrors { white: Vec3::repeat(1e-3), instability: Vec3::repeat(1e-4), tau: 10.0, ..Default::default() },
            accel: AxisErrors { white: Vec3::repeat(1e-2), random_walk: Vec3::repeat(1e-3), ..Default::default() },
            seed: 7,
        };
        assert_eq!(corrupt_imu(&t, &e).unwrap(), corrupt_imu(&t, &e).unwrap());
        let other = SensorErrorSpec { seed: 8, ..e };
        assert_ne!(corrupt_imu(&t, &e).unwrap(), corrupt_imu(&t, &other).unwrap());
    }

    #[test]
    fn negative_noise_is_rejected() {
        let e = SensorErrorSpec { gyro: AxisErrors { white: Vec3::new(-1.0, 0.0, 0.0), ..Default::default() }, ..Default::default() };
        assert!(e.validate().is_err());
        let sp = TrajectorySpec { rate: -1.0, ..spec(TrajectoryKind::Stationary) };
        assert!(gen_truth(&sp, &EarthModel::default()).is_err());
    }

    #[test]
    fn clean_gnss_equals_truth() {
        let e = EarthModel::default();
        let t = gen_truth(&spec(TrajectoryKind::Circular { radius: 100.0, speed: 10.0 }), &e).unwrap();
        let fixes = gen_gnss(&t, &GnssSpec::default(), 1, &e).unwrap();
        assert_eq!(fixes.len(), 2);
        assert_eq!(fixes[0].t, 1.0);
        assert_eq!(fixes[0].v, t[100].nav.v);
        assert_eq!(fixes[1].lat, t[200].nav.lat);
    }

    #[test]
    fn skewed_gnss_lags_accelerating_truth() {
        let e = EarthModel::default();
        let sp = TrajectorySpec {
            duration: 4.0,
            ..spec(TrajectoryKind::Accelerate { accel: Vec3::new(1.0, 0.0, 0.0), start: 0.0, duration: 10.0 })
        };
        let t = gen_truth(&sp, &e).unwrap();
        let fixes = gen_gnss(&t, &GnssSpec { skew: 0.5, ..Default::default() }, 1, &e).unwrap();
        // the fix stamped 2.5 s carries the 2 s velocity
        let f = fixes.iter().find(|f| (f.t - 2.5).abs() < 1e-9).unwrap();
        let truth_at_stamp = t[250].nav.v.x;
        assert_abs_diff_eq!(truth_at_stamp - f.v.x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn accelerate_specific_force_is_exact() {
        let e = EarthModel::default();
        let sp = spec(TrajectoryKind::Accelerate { accel: Vec3::new(0.0, 2.0, 0.0), start: 0.505, duration: 1.0 });
        let t = gen_truth(&sp, &e).unwrap();
        let total: Vec3 = t[1..].iter().map(|s| s.f * 0.01).sum();
        assert_abs_diff_eq!(total.y, 2.0, epsilon = 1e-12);
    }
}

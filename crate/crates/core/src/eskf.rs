//! Closed-loop 13-state error-state Kalman filter.
//!
//! State layout: gyro biases (0..3), body-z accelerometer correction (3),
//! tilt errors ψ_n, ψ_e, ψ_d (4..7), NED velocity errors (7..10), latitude,
//! longitude and altitude errors (10..13). Velocity and position errors are
//! `true − navigation`; tilt is the small rotation taking the true frame onto
//! the computed one, so feedback applies `ψ = −x`.

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::geom::{quat_normalize, rotvec_to_quat, wrap_pi, Dcm, RotationVector, Vec3};
use crate::imu::{Increment, SensorBiases};
use crate::mech::{mech_step, EarthModel, MechConfig, MechError, MechStep, NavState, POLAR_MARGIN};

pub const N_STATES: usize = 13;
pub const GYRO_BIAS: usize = 0;
pub const ACCEL_Z: usize = 3;
pub const TILT: usize = 4;
pub const VEL: usize = 7;
pub const POS: usize = 10;

pub type ErrorState13 = SVector<f64, N_STATES>;
pub type Cov13 = SMatrix<f64, N_STATES, N_STATES>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EskfError {
    #[error("latitude {0} rad is too close to a pole")]
    PolarSingularity(f64),
    #[error("innovation variance {s} for state {index} is not positive")]
    CovarianceCollapsed { index: usize, s: f64 },
    #[error("measurement index {0} appears more than once")]
    DuplicateIndex(usize),
    #[error("measurement index {0} is not a velocity or position state")]
    BadIndex(usize),
    #[error("measurement variance {0} is negative")]
    NegativeVariance(f64),
    #[error(transparent)]
    Mech(#[from] MechError),
}

/// The nonzero entries of `A·dT` (transition minus identity).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseTransition {
    pub entries: [(usize, usize, f64); 19],
}

impl SparseTransition {
    /// Dense `A·dT`.
    pub fn to_dense(&self) -> Cov13 {
        let mut a = Cov13::zeros();
        for &(i, j, t) in &self.entries {
            a[(i, j)] += t;
        }
        a
    }

    /// Dense transition `I + A·dT`.
    pub fn phi(&self) -> Cov13 {
        Cov13::identity() + self.to_dense()
    }
}

/// Diagonal process-noise densities, state units² per second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessNoise(pub [f64; N_STATES]);

/// Direct measurement of one error state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarMeasurement {
    pub index: usize,
    pub z: f64,
    pub variance: f64,
}

/// Transition entries for one propagation interval.
///
/// `c` is the current attitude, `a_n` and `a_e` the horizontal specific force
/// in NED.
pub fn build_transition(
    c: &Dcm,
    a_n: f64,
    a_e: f64,
    earth: &EarthModel,
    lat: f64,
    dt: f64,
) -> Result<SparseTransition, EskfError> {
    if lat.abs() >= std::f64::consts::FRAC_PI_2 - POLAR_MARGIN || !lat.is_finite() {
        return Err(EskfError::PolarSingularity(lat));
    }
    let m = c.matrix();
    let g = earth.g_bar;
    Ok(SparseTransition {
        entries: [
            (4, 0, m[(0, 0)] * dt),
            (4, 1, m[(0, 1)] * dt),
            (4, 2, m[(0, 2)] * dt),
            (5, 0, m[(1, 0)] * dt),
            (5, 1, m[(1, 1)] * dt),
            (5, 2, m[(1, 2)] * dt),
            (6, 0, m[(2, 0)] * dt),
            (6, 1, m[(2, 1)] * dt),
            (6, 2, m[(2, 2)] * dt),
            (7, 5, g * dt),
            (7, 6, a_e * dt),
            (8, 4, -g * dt),
            (8, 6, -a_n * dt),
            (9, 3, m[(2, 2)] * dt),
            (9, 4, -a_e * dt),
            (9, 5, -a_n * dt),
            (10, 7, dt / earth.r),
            (11, 8, dt / (earth.r * lat.cos())),
            (12, 9, -dt),
        ],
    })
}

/// `P ← Φ P Φᵀ + diag(q)·dT` with `Φ = I + T`, touching only the nonzero
/// entries of `T`.
pub fn propagate_covariance(p: &Cov13, t: &SparseTransition, q: &ProcessNoise, dt: f64) -> Cov13 {
    // rows: Φ·P
    let mut ko = *p;
    for &(i, j, v) in &t.entries {
        for k in 0..N_STATES {
            ko[(i, k)] += v * p[(j, k)];
        }
    }
    // columns: (Φ·P)·Φᵀ
    let mut kp = ko;
    for &(i, j, v) in &t.entries {
        for k in 0..N_STATES {
            kp[(k, i)] += v * ko[(k, j)];
        }
    }
    for (i, qi) in q.0.iter().enumerate() {
        kp[(i, i)] += qi * dt;
    }
    symmetrize(&kp)
}

fn symmetrize(p: &Cov13) -> Cov13 {
    (p + p.transpose()) * 0.5
}

/// Scalar Kalman update against state `m.index`.
pub fn scalar_update(p: &Cov13, x: &ErrorState13, m: &ScalarMeasurement) -> Result<(Cov13, ErrorState13), EskfError> {
    let i = m.index;
    if i >= N_STATES {
        return Err(EskfError::BadIndex(i));
    }
    if m.variance < 0.0 || m.variance.is_nan() {
        return Err(EskfError::NegativeVariance(m.variance));
    }
    let s = p[(i, i)] + m.variance;
    if !(s > 0.0) {
        return Err(EskfError::CovarianceCollapsed { index: i, s });
    }
    let tmp = 1.0 / s;
    let k = p.column(i) * tmp;
    let innovation = m.z - x[i];
    let x_new = x + k * innovation;
    let row = p.row(i).into_owned();
    let p_new = p - k * row;
    Ok((symmetrize(&p_new), x_new))
}

/// Folds [`scalar_update`] over `measurements` in the given order.
pub fn sequential_update(
    p: &Cov13,
    x: &ErrorState13,
    measurements: &[ScalarMeasurement],
) -> Result<(Cov13, ErrorState13), EskfError> {
    let mut seen = [false; N_STATES];
    for m in measurements {
        if m.index >= N_STATES {
            return Err(EskfError::BadIndex(m.index));
        }
        if seen[m.index] {
            return Err(EskfError::DuplicateIndex(m.index));
        }
        seen[m.index] = true;
    }
    measurements
        .iter()
        .try_fold((*p, *x), |(p, x), m| scalar_update(&p, &x, m))
}

/// Feeds the error estimate back into the navigation solution and sensor
/// corrections, returning the zeroed error state.
pub fn apply_corrections(nav: &NavState, x: &ErrorState13, biases: &SensorBiases) -> (NavState, SensorBiases, ErrorState13) {
    let mut b = *biases;
    b.gyro.0 += Vec3::new(x[0], x[1], x[2]);
    b.accel_z += x[ACCEL_Z];

    let c = nav.dcm();
    let psi = -Vec3::new(x[TILT], x[TILT + 1], x[TILT + 2]);
    let dphi = c.matrix().transpose() * psi;
    let mut out = *nav;
    let q = nav.q * rotvec_to_quat(&RotationVector(dphi));
    out.q = quat_normalize(&q).unwrap_or_else(|_| q.normalized());
    out.v += Vec3::new(x[VEL], x[VEL + 1], x[VEL + 2]);
    out.lat += x[POS];
    out.lon = wrap_pi(out.lon + x[POS + 1]);
    out.h += x[POS + 2];
    (out, b, ErrorState13::zeros())
}

/// A GNSS position and velocity fix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnssFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub h: f64,
    pub v: Vec3,
}

/// One-sigma GNSS accuracy: position in metres NED, velocity in m/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnssNoise {
    pub pos: Vec3,
    pub vel: Vec3,
}

impl Default for GnssNoise {
    fn default() -> Self {
        Self { pos: Vec3::new(2.0, 2.0, 3.0), vel: Vec3::new(0.1, 0.1, 0.1) }
    }
}

/// The six measurements `GNSS − navigation`, ordered by state index.
pub fn gnss_measurements(nav: &NavState, fix: &GnssFix, noise: &GnssNoise, earth: &EarthModel) -> [ScalarMeasurement; 6] {
    let dv = fix.v - nav.v;
    let r = earth.r;
    let rc = r * nav.lat.cos();
    let m = |index, z, sigma: f64| ScalarMeasurement { index, z, variance: sigma * sigma };
    [
        m(VEL, dv.x, noise.vel.x),
        m(VEL + 1, dv.y, noise.vel.y),
        m(VEL + 2, dv.z, noise.vel.z),
        m(POS, fix.lat - nav.lat, noise.pos.x / r),
        m(POS + 1, wrap_pi(fix.lon - nav.lon), noise.pos.y / rc),
        m(POS + 2, fix.h - nav.h, noise.pos.z),
    ]
}

/// Filter tunables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EskfConfig {
    pub earth: EarthModel,
    pub mech: MechConfig,
    pub process_noise: ProcessNoise,
    /// Initial covariance diagonal.
    pub p0: [f64; N_STATES],
    pub gnss_noise: GnssNoise,
}

impl Default for EskfConfig {
    fn default() -> Self {
        let earth = EarthModel::default();
        let gnss_noise = GnssNoise::default();
        let tilt = 5f64.to_radians().powi(2);
        let bg = 0.2f64.to_radians().powi(2);
        let r = earth.r;
        let mut p0 = [0.0; N_STATES];
        p0[..3].fill(bg);
        p0[ACCEL_Z] = 0.1f64.powi(2);
        p0[TILT..VEL].fill(tilt);
        p0[VEL..POS].fill(1.0);
        p0[POS] = (gnss_noise.pos.x / r).powi(2);
        p0[POS + 1] = (gnss_noise.pos.y / r).powi(2);
        p0[POS + 2] = gnss_noise.pos.z.powi(2);
        let mut q = [0.0; N_STATES];
        q[..3].fill(1e-12);
        q[ACCEL_Z] = 1e-8;
        q[TILT..VEL].fill(1e-10);
        q[VEL..POS].fill(1e-4);
        q[POS] = 1e-4 / (r * r);
        q[POS + 1] = 1e-4 / (r * r);
        q[POS + 2] = 1e-4;
        Self { earth, mech: MechConfig::default(), process_noise: ProcessNoise(q), p0, gnss_noise }
    }
}

/// Outcome of a measurement update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateReport {
    /// Innovations in state order: δv_n, δv_e, δv_d, δlat, δlon, δh.
    pub innovations: [f64; 6],
    /// Error estimate before it was fed back.
    pub estimate: ErrorState13,
}

/// Navigation solution, covariance and sensor corrections advanced together.
#[derive(Clone, Debug)]
pub struct Eskf {
    pub cfg: EskfConfig,
    pub nav: NavState,
    pub p: Cov13,
    pub x: ErrorState13,
    pub biases: SensorBiases,
}

impl Eskf {
    pub fn new(nav: NavState, cfg: EskfConfig) -> Self {
        let p = Cov13::from_diagonal(&ErrorState13::from_row_slice(&cfg.p0));
        Self { cfg, nav, p, x: ErrorState13::zeros(), biases: SensorBiases::default() }
    }

    /// Mechanization followed by covariance propagation.
    pub fn propagate(&mut self, inc: &Increment) -> Result<MechStep, EskfError> {
        let step = mech_step(&self.nav, &inc.phi, &inc.dv, inc.dt, &self.cfg.earth, &self.cfg.mech)?;
        self.nav = step.nav;
        let (a_n, a_e) = if inc.dt > 0.0 { (step.dv_ned.x / inc.dt, step.dv_ned.y / inc.dt) } else { (0.0, 0.0) };
        let t = build_transition(&self.nav.dcm(), a_n, a_e, &self.cfg.earth, self.nav.lat, inc.dt)?;
        self.p = propagate_covariance(&self.p, &t, &self.cfg.process_noise, inc.dt);
        Ok(step)
    }

    /// Sequential update with one fix, then closed-loop feedback.
    pub fn update(&mut self, fix: &GnssFix) -> Result<UpdateReport, EskfError> {
        let ms = gnss_measurements(&self.nav, fix, &self.cfg.gnss_noise, &self.cfg.earth);
        let innovations = ms.map(|m| m.z - self.x[m.index]);
        let (p, x) = sequential_update(&self.p, &self.x, &ms)?;
        let (nav, biases, zero) = apply_corrections(&self.nav, &x, &self.biases);
        self.p = p;
        self.nav = nav;
        self.biases = biases;
        self.x = zero;
        Ok(UpdateReport { innovations, estimate: x })
    }

    /// One filter cycle: propagate, then update when a fix is present.
    pub fn cycle(&mut self, inc: &Increment, fix: Option<&GnssFix>) -> Result<Option<UpdateReport>, EskfError> {
        self.propagate(inc)?;
        fix.map(|f| self.update(f)).transpose()
    }
}

/// Functional form of [`Eskf::cycle`].
pub fn kf_cycle(
    nav: &NavState,
    p: &Cov13,
    biases: &SensorBiases,
    inc: &Increment,
    fix: Option<&GnssFix>,
    cfg: &EskfConfig,
) -> Result<(NavState, Cov13, SensorBiases), EskfError> {
    let mut f = Eskf { cfg: *cfg, nav: *nav, p: *p, x: ErrorState13::zeros(), biases: *biases };
    f.cycle(inc, fix)?;
    Ok((f.nav, f.p, f.biases))
}

/// Index of the propagation epoch nearest to a fix stamped `t_fix`, after
/// removing a known constant lag. Epoch `k` is at `t0 + k·period`.
pub fn align_fix_epoch(t_fix: f64, lag: f64, t0: f64, period: f64) -> Option<usize> {
    let k = ((t_fix - lag - t0) / period).round();
    (k >= 0.0 && k.is_finite()).then_some(k as usize)
}

//! High-rate IMU preprocessing: gyro debiasing plus coning and sculling
//! accumulation that turn l-rate samples into compensated m-rate increments.

use thiserror::Error;

use crate::geom::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImuError {
    #[error("sample period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("non-finite sample component")]
    NonFinite,
    #[error("l-cycles per m-cycle must be at least 1")]
    BadRatio,
}

/// One raw sample: angular rate (rad/s) and specific force (m/s²) held over
/// the period `dt` ending at the sample time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawImuSample {
    pub w: Vec3,
    pub f: Vec3,
    pub dt: f64,
}

impl RawImuSample {
    pub fn new(w: Vec3, f: Vec3, dt: f64) -> Result<Self, ImuError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ImuError::BadPeriod(dt));
        }
        if !w.iter().chain(f.iter()).all(|x| x.is_finite()) {
            return Err(ImuError::NonFinite);
        }
        Ok(Self { w, f, dt })
    }
}

/// Gyro bias estimate, rad/s per body axis.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct GyroBias(pub Vec3);

/// Sensor corrections maintained by a filter: the gyro bias subtracted from
/// every rate sample and an additive correction to body-z specific force.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SensorBiases {
    pub gyro: GyroBias,
    pub accel_z: f64,
}

/// Angular increment `(w − b)·dT`.
pub fn debias_gyro(sample: &RawImuSample, bias: &GyroBias) -> Vec3 {
    (sample.w - bias.0) * sample.dt
}

/// Coning accumulators for one m-interval.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ConingState {
    pub alpha: Vec3,
    pub beta: Vec3,
    pub prev_dalpha: Vec3,
}

impl ConingState {
    pub fn step(&mut self, dalpha: &Vec3) {
        let lead = self.alpha + self.prev_dalpha / 6.0;
        self.beta += lead.cross(dalpha) * 0.5;
        self.alpha += dalpha;
        self.prev_dalpha = *dalpha;
    }

    /// Returns `α_m + β_m` and resets the accumulators.
    pub fn finalize(&mut self) -> Vec3 {
        let phi = self.alpha + self.beta;
        *self = Self::default();
        phi
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

pub fn coning_step(state: &ConingState, dalpha: &Vec3) -> ConingState {
    let mut s = *state;
    s.step(dalpha);
    s
}

pub fn coning_finalize(state: &ConingState) -> (Vec3, ConingState) {
    let mut s = *state;
    let phi = s.finalize();
    (phi, s)
}

/// Sculling accumulators for one m-interval.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ScullingState {
    pub v: Vec3,
    pub dv_scul: Vec3,
    pub prev_dalpha: Vec3,
    pub prev_dv: Vec3,
}

impl ScullingState {
    /// Advances by one l-cycle. `coning` must be the coning state *before*
    /// it consumes `dalpha`, so that it still holds `α_{l−1}`.
    pub fn step(&mut self, dalpha: &Vec3, dv: &Vec3, coning: &ConingState) {
        let a = coning.alpha + self.prev_dalpha / 6.0;
        let v = self.v + self.prev_dv / 6.0;
        self.dv_scul += (a.cross(dv) + v.cross(dalpha)) * 0.5;
        self.v += dv;
        self.prev_dalpha = *dalpha;
        self.prev_dv = *dv;
    }

    /// Returns `Δv_m` and resets. The rotation-compensation term
    /// `½ α_m × v_m` is included when `rotation_compensation` is set.
    pub fn finalize(&mut self, alpha_m: &Vec3, rotation_compensation: bool) -> Vec3 {
        let mut dv = self.v + self.dv_scul;
        if rotation_compensation {
            dv += alpha_m.cross(&self.v) * 0.5;
        }
        *self = Self::default();
        dv
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

pub fn sculling_step(state: &ScullingState, dalpha: &Vec3, dv: &Vec3, coning: &ConingState) -> ScullingState {
    let mut s = *state;
    s.step(dalpha, dv, coning);
    s
}

pub fn sculling_finalize(state: &ScullingState, alpha_m: &Vec3, rotation_compensation: bool) -> (Vec3, ScullingState) {
    let mut s = *state;
    let dv = s.finalize(alpha_m, rotation_compensation);
    (dv, s)
}

/// Compensated m-rate increments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Increment {
    /// Rotation vector of body frame `m` relative to body frame `m−1`.
    pub phi: Vec3,
    /// Velocity increment expressed in body frame `m−1`.
    pub dv: Vec3,
    /// Length of the m-interval, s.
    pub dt: f64,
    /// Set when the interval was closed early by [`Preprocessor::flush`].
    pub partial: bool,
}

/// Drives the coning and sculling accumulators in lockstep and emits one
/// [`Increment`] every `l_per_m` samples.
#[derive(Clone, Debug)]
pub struct Preprocessor {
    l_per_m: usize,
    rotation_compensation: bool,
    coning: ConingState,
    sculling: ScullingState,
    count: usize,
    elapsed: f64,
}

impl Preprocessor {
    pub fn new(l_per_m: usize, rotation_compensation: bool) -> Result<Self, ImuError> {
        if l_per_m == 0 {
            return Err(ImuError::BadRatio);
        }
        Ok(Self {
            l_per_m,
            rotation_compensation,
            coning: ConingState::default(),
            sculling: ScullingState::default(),
            count: 0,
            elapsed: 0.0,
        })
    }

    pub fn l_per_m(&self) -> usize {
        self.l_per_m
    }

    /// Consumes one sample with the current bias corrections applied.
    pub fn push(&mut self, sample: &RawImuSample, biases: &SensorBiases) -> Option<Increment> {
        let dalpha = debias_gyro(sample, &biases.gyro);
        let mut f = sample.f;
        f.z += biases.accel_z;
        let dv = f * sample.dt;
        self.sculling.step(&dalpha, &dv, &self.coning);
        self.coning.step(&dalpha);
        self.count += 1;
        self.elapsed += sample.dt;
        if self.count == self.l_per_m {
            Some(self.close(false))
        } else {
            None
        }
    }

    /// Closes a partially filled interval, if any.
    pub fn flush(&mut self) -> Option<Increment> {
        (self.count > 0).then(|| self.close(true))
    }

    fn close(&mut self, partial: bool) -> Increment {
        let alpha_m = self.coning.alpha;
        let dv = self.sculling.finalize(&alpha_m, self.rotation_compensation);
        let phi = self.coning.finalize();
        let dt = self.elapsed;
        self.count = 0;
        self.elapsed = 0.0;
        Increment { phi, dv, dt, partial }
    }
}

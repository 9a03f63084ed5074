//! Strapdown inertial navigation with GNSS aiding.
//!
//! The crate is organised bottom-up:
//!
//! * [`geom`]: quaternions, direction cosine matrices, Euler angles and the
//!   polynomial arctangent.
//! * [`imu`]: gyro debiasing and coning/sculling compensation at the sensor
//!   rate.
//! * [`mech`]: quaternion attitude update and NED velocity/position
//!   integration at the navigation rate.
//! * [`eskf`]: the 13-state closed-loop error-state Kalman filter.
//! * [`altfilt`]: PI complementary and gradient-descent attitude filters.
//! * [`sim`]: truth trajectories, sensor-error models and GNSS synthesis.
//! * [`units`]: datasheet unit conversions.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod altfilt;
pub mod eskf;
pub mod geom;
pub mod imu;
pub mod mech;
pub mod sim;
pub mod units;

pub use altfilt::{CompFilterState, GdFilterState, PiGains};
pub use eskf::{Cov13, ErrorState13, Eskf, EskfConfig, GnssFix, GnssNoise, ProcessNoise, ScalarMeasurement, SparseTransition};
pub use geom::{Dcm, EulerAngles, Quaternion, RotationVector, Vec3};
pub use imu::{ConingState, GyroBias, Increment, Preprocessor, RawImuSample, ScullingState, SensorBiases};
pub use mech::{EarthModel, MechConfig, NavState};
pub use sim::{GnssSpec, SensorErrorSpec, TrajectoryKind, TrajectorySpec, TruthSample};

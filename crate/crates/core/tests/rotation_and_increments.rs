use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

use strapnav::geom::{quat_normalize, quat_to_dcm, rotvec_to_quat, Quaternion, RotationVector, Vec3};
use strapnav::imu::{Preprocessor, SensorBiases};
use strapnav::mech::{mech_step, EarthModel, MechConfig};
use strapnav::sim::{corrupt_imu, gen_truth, InitialPose, SensorErrorSpec, TrajectoryKind, TrajectorySpec};

proptest! {
    #[test]
    fn rotvec_matches_rodrigues(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
        let c = quat_to_dcm(&rotvec_to_quat(&RotationVector::new(x, y, z)));
        let r = Rotation3::from_scaled_axis(Vector3::new(x, y, z));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((c.0[(i, j)] - r[(i, j)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unit_quaternions_give_proper_rotations(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        prop_assume!(a * a + b * b + c * c + d * d > 1e-6);
        let q = Quaternion::new(a, b, c, d).normalized();
        let m = quat_to_dcm(&q);
        prop_assert!(m.orthonormality_error() <= 1e-12);
        prop_assert!((m.0.determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn normalization_is_second_order_idempotent(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0, k in 0.96f64..1.04,
    ) {
        prop_assume!(a * a + b * b + c * c + d * d > 1e-3);
        let q = Quaternion::new(a, b, c, d).normalized().scale(k.sqrt());
        let defect = 1.0 - q.norm_squared();
        let once = quat_normalize(&q).unwrap();
        let twice = quat_normalize(&once).unwrap();
        let second = [twice.q0 - once.q0, twice.q1 - once.q1, twice.q2 - once.q2, twice.q3 - once.q3]
            .iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // the second pass corrects a residual of order (3/4)·defect²
        prop_assert!(second <= defect * defect + 1e-15);
    }
}

/// Error of the compensated pipeline against the closed-form truth after
/// `duration` seconds of a rigid motion with the m-rate held at 50 Hz.
fn pipeline_error(kind: TrajectoryKind, l_rate: f64, duration: f64) -> (f64, f64) {
    // gravity-free so the velocity error isolates the increment algorithms
    let earth = EarthModel { g_bar: 0.0, ..Default::default() };
    let spec = TrajectorySpec { kind, duration, rate: l_rate, initial: InitialPose::default() };
    let truth = gen_truth(&spec, &earth).unwrap();
    let imu = corrupt_imu(&truth, &SensorErrorSpec::default()).unwrap();
    let l_per_m = (l_rate / 50.0).round() as usize;
    let mut pre = Preprocessor::new(l_per_m, true).unwrap();
    let mut nav = truth[0].nav;
    for r in &imu {
        if let Some(inc) = pre.push(&r.sample, &SensorBiases::default()) {
            nav = mech_step(&nav, &inc.phi, &inc.dv, inc.dt, &earth, &MechConfig::default()).unwrap().nav;
        }
    }
    let end = truth.last().unwrap().nav;
    (nav.q.angle_to(&end.q), (nav.v - end.v).norm())
}

#[test]
fn errors_shrink_quadratically_with_sensor_rate() {
    let rates = [100.0, 200.0, 400.0, 800.0];
    let coning = TrajectoryKind::Coning { amplitude: 0.02, frequency: 30.0 };
    let sculling = TrajectoryKind::Sculling { angle_amplitude: 0.02, accel_amplitude: 2.0, frequency: 30.0 };
    let att: Vec<f64> = rates.iter().map(|r| pipeline_error(coning, *r, 5.0).0).collect();
    let vel: Vec<f64> = rates.iter().map(|r| pipeline_error(sculling, *r, 5.0).1).collect();
    for w in att.windows(2).chain(vel.windows(2)) {
        assert!(w[1] <= w[0] / 4.0 * 1.05, "error did not shrink quadratically: {att:?} {vel:?}");
    }
}

#[test]
fn exact_increments_track_circular_truth() {
    let earth = EarthModel::default();
    let spec = TrajectorySpec {
        kind: TrajectoryKind::Circular { radius: 100.0, speed: 10.0 },
        duration: 60.0,
        rate: 1000.0,
        initial: InitialPose { lat: 0.6, lon: 0.2, h: 30.0, ..Default::default() },
    };
    let truth = gen_truth(&spec, &earth).unwrap();
    let imu = corrupt_imu(&truth, &SensorErrorSpec::default()).unwrap();
    let mut pre = Preprocessor::new(10, true).unwrap();
    let mut nav = truth[0].nav;
    for r in &imu {
        if let Some(inc) = pre.push(&r.sample, &SensorBiases::default()) {
            nav = mech_step(&nav, &inc.phi, &inc.dv, inc.dt, &earth, &MechConfig::default()).unwrap().nav;
        }
    }
    let end = truth.last().unwrap().nav;
    let north = (nav.lat - end.lat) * earth.r;
    let east = (nav.lon - end.lon) * earth.r * end.lat.cos();
    assert!(nav.q.angle_to(&end.q) < 1e-9);
    assert!((nav.v - end.v).norm() < 1e-6);
    assert!(north.hypot(east) < 1e-3, "horizontal error {} m", north.hypot(east));
    assert!((nav.h - end.h).abs() < 1e-6);
}

#[test]
fn mechanization_is_bit_reproducible() {
    let run = || pipeline_error(TrajectoryKind::Coning { amplitude: 0.05, frequency: 10.0 }, 400.0, 2.0);
    assert_eq!(run(), run());
}

#[test]
fn identity_of_rotvec_components() {
    let q = rotvec_to_quat(&RotationVector(Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2)));
    let c = quat_to_dcm(&q);
    assert!((c.apply(&Vec3::x()) - Vec3::y()).norm() < 1e-15);
}

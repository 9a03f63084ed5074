use strapnav::geom::{quat_to_dcm, rotvec_to_quat, EulerAngles, RotationVector, Vec3};
use strapnav::mech::EarthModel;
use strapnav::sim::{
    corrupt_imu, gen_gnss, gen_truth, kinematics, AxisErrors, GnssSpec, InitialPose, SensorErrorSpec, TrajectoryKind,
    TrajectorySpec, TruthSample,
};

fn spec(kind: TrajectoryKind, duration: f64, rate: f64) -> TrajectorySpec {
    TrajectorySpec {
        kind,
        duration,
        rate,
        initial: InitialPose { lat: 0.7, lon: -1.2, h: 120.0, attitude: EulerAngles::new(0.1, -0.05, 0.8) },
    }
}

/// Integrates the instantaneous rates with 100 midpoint substeps per epoch and
/// checks every emitted epoch against the result.
fn check_self_consistency(kind: TrajectoryKind) {
    let earth = EarthModel::default();
    let s = spec(kind, 10.0, 100.0);
    let truth = gen_truth(&s, &earth).unwrap();
    let sub = 100;
    let h = s.dt() / sub as f64;
    let mut q = truth[0].nav.q;
    let mut v = truth[0].nav.v;
    let mut pos = Vec3::zeros();
    let mut lon = truth[0].nav.lon;
    let mut worst = [0.0f64; 4];
    for k in 1..truth.len() {
        let t0 = truth[k - 1].t;
        let mut f_mean = Vec3::zeros();
        for j in 0..sub {
            let tm = t0 + (j as f64 + 0.5) * h;
            let km = kinematics(&s, tm);
            q = q * rotvec_to_quat(&RotationVector(km.w * h));
            let lat_m = s.initial.lat + (pos.x + 0.5 * h * km.v.x) / earth.r;
            lon += km.v.y / (earth.r * lat_m.cos()) * h;
            pos += km.v * h;
            v += km.a * h;
            f_mean += quat_to_dcm(&km.q).0.transpose() * (km.a - Vec3::new(0.0, 0.0, earth.g_bar)) / sub as f64;
        }
        let tr: &TruthSample = &truth[k];
        let lat = s.initial.lat + pos.x / earth.r;
        worst[0] = worst[0].max(q.angle_to(&tr.nav.q));
        worst[1] = worst[1].max((v - tr.nav.v).norm());
        let dn = (lat - tr.nav.lat) * earth.r;
        let de = (lon - tr.nav.lon) * earth.r * lat.cos();
        let dd = (s.initial.h - pos.z) - tr.nav.h;
        worst[2] = worst[2].max(Vec3::new(dn, de, dd).norm());
        worst[3] = worst[3].max((f_mean - tr.f).norm());
    }
    assert!(worst.iter().all(|w| *w < 1e-6), "{kind:?}: attitude, velocity, position, force {worst:?}");
}

#[test]
fn trajectories_are_kinematically_self_consistent() {
    check_self_consistency(TrajectoryKind::ConstantRate { axis: Vec3::new(1.0, -2.0, 0.5), rate: 0.4 });
    check_self_consistency(TrajectoryKind::Coning { amplitude: 0.05, frequency: 6.0 });
    check_self_consistency(TrajectoryKind::Sculling { angle_amplitude: 0.03, accel_amplitude: 1.5, frequency: 5.0 });
    check_self_consistency(TrajectoryKind::Circular { radius: 200.0, speed: 15.0 });
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn stationary(duration: f64, rate: f64) -> Vec<TruthSample> {
    gen_truth(&spec(TrajectoryKind::Stationary, duration, rate), &EarthModel::default()).unwrap()
}

#[test]
fn gnss_velocity_noise_has_requested_spread() {
    let earth = EarthModel::default();
    let truth = stationary(300.0, 100.0);
    let g = GnssSpec { rate: 10.0, pos_sigma: Vec3::new(2.0, 2.0, 3.0), vel_sigma: Vec3::repeat(0.1), skew: 0.0 };
    let fixes = gen_gnss(&truth, &g, 11, &earth).unwrap();
    assert_eq!(fixes.len(), 3000);
    for axis in 0..3 {
        let vs: Vec<f64> = fixes.iter().map(|f| f.v[axis]).collect();
        let (m, s) = mean_std(&vs);
        assert!(m.abs() < 4.0 * 0.1 / (vs.len() as f64).sqrt(), "axis {axis} mean {m}");
        assert!((s / 0.1 - 1.0).abs() < 0.1, "axis {axis} std {s}");
    }
    let hs: Vec<f64> = fixes.iter().map(|f| f.h - truth[0].nav.h).collect();
    assert!((mean_std(&hs).1 / 3.0 - 1.0).abs() < 0.1);
}

#[test]
fn gnss_stamps_include_skew() {
    let earth = EarthModel::default();
    let truth = stationary(5.0, 100.0);
    let g = GnssSpec { skew: 0.25, ..Default::default() };
    let fixes = gen_gnss(&truth, &g, 1, &earth).unwrap();
    for (j, f) in fixes.iter().enumerate() {
        assert!((f.t - ((j + 1) as f64 + 0.25)).abs() < 1e-12);
    }
}

#[test]
fn white_noise_density_scales_with_rate() {
    let truth = stationary(100.0, 200.0);
    let d = 1e-3;
    let err = SensorErrorSpec { gyro: AxisErrors { white: Vec3::repeat(d), ..Default::default() }, seed: 2, ..Default::default() };
    let imu = corrupt_imu(&truth, &err).unwrap();
    let xs: Vec<f64> = imu.iter().map(|r| r.sample.w.y).collect();
    let (_, s) = mean_std(&xs);
    assert!((s / (d * 200f64.sqrt()) - 1.0).abs() < 0.05, "std {s}");
}

#[test]
fn gauss_markov_bias_has_stationary_variance_and_correlation() {
    let truth = stationary(2000.0, 100.0);
    let (sigma, tau) = (2e-3, 1.0);
    let err = SensorErrorSpec {
        accel: AxisErrors { instability: Vec3::repeat(sigma), tau, ..Default::default() },
        seed: 4,
        ..Default::default()
    };
    let imu = corrupt_imu(&truth, &err).unwrap();
    let xs: Vec<f64> = imu.iter().zip(&truth[1..]).map(|(r, t)| r.sample.f.x - t.f.x).collect();
    let (m, s) = mean_std(&xs);
    assert!((s / sigma - 1.0).abs() < 0.1, "std {s}");
    let lag = 100;
    let c: f64 = xs.windows(lag + 1).map(|w| (w[0] - m) * (w[lag] - m)).sum::<f64>() / (xs.len() - lag) as f64;
    let rho = c / (s * s);
    assert!((rho - (-1.0f64).exp()).abs() < 0.1, "lag-1s correlation {rho}");
}

#[test]
fn random_walk_variance_grows_linearly() {
    let truth = stationary(100.0, 100.0);
    let k = 1e-3;
    let ends: Vec<f64> = (0..400)
        .map(|seed| {
            let err = SensorErrorSpec { gyro: AxisErrors { random_walk: Vec3::repeat(k), ..Default::default() }, seed, ..Default::default() };
            corrupt_imu(&truth, &err).unwrap().last().unwrap().sample.w.z
        })
        .collect();
    let var = ends.iter().map(|x| x * x).sum::<f64>() / ends.len() as f64;
    let expected = k * k * 100.0;
    assert!((var / expected - 1.0).abs() < 0.2, "variance ratio {}", var / expected);
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let earth = EarthModel::default();
    let s = spec(TrajectoryKind::Circular { radius: 50.0, speed: 5.0 }, 20.0, 200.0);
    let err = SensorErrorSpec {
        gyro: AxisErrors { white: Vec3::repeat(1e-4), instability: Vec3::repeat(1e-5), tau: 50.0, random_walk: Vec3::repeat(1e-6), ..Default::default() },
        accel: AxisErrors { white: Vec3::repeat(1e-3), ..Default::default() },
        seed: 8,
    };
    let g = GnssSpec { pos_sigma: Vec3::repeat(1.0), vel_sigma: Vec3::repeat(0.1), ..Default::default() };
    let run = |seed: u64| {
        let truth = gen_truth(&s, &earth).unwrap();
        let imu = corrupt_imu(&truth, &SensorErrorSpec { seed, ..err }).unwrap();
        let fixes = gen_gnss(&truth, &g, seed, &earth).unwrap();
        (truth, imu, fixes)
    };
    let a = run(8);
    let b = run(8);
    let c = run(9);
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
    assert_ne!(a.2, c.2);
}

#[test]
fn invalid_specs_are_rejected() {
    let earth = EarthModel::default();
    assert!(gen_truth(&spec(TrajectoryKind::Stationary, -1.0, 100.0), &earth).is_err());
    assert!(gen_truth(&spec(TrajectoryKind::Stationary, 1.0, 0.0), &earth).is_err());
    let truth = stationary(1.0, 10.0);
    let bad = SensorErrorSpec { gyro: AxisErrors { white: Vec3::new(-1.0, 0.0, 0.0), ..Default::default() }, ..Default::default() };
    assert!(corrupt_imu(&truth, &bad).is_err());
    assert!(gen_gnss(&truth, &GnssSpec { rate: 0.0, ..Default::default() }, 0, &earth).is_err());
}

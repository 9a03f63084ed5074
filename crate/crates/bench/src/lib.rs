//! Fixed inputs shared by the benchmarks.

use strapnav::eskf::{build_transition, gnss_measurements};
use strapnav::geom::euler_to_quat;
use strapnav::{
    Cov13, EarthModel, EskfConfig, EulerAngles, GnssFix, NavState, ProcessNoise, RawImuSample, ScalarMeasurement,
    SparseTransition, Vec3,
};

pub struct Fixture {
    pub nav: NavState,
    pub earth: EarthModel,
    pub p: Cov13,
    pub transition: SparseTransition,
    pub noise: ProcessNoise,
    pub measurements: [ScalarMeasurement; 6],
    /// One navigation epoch of IMU samples at 1000 Hz.
    pub samples: Vec<RawImuSample>,
    pub dt: f64,
}

pub fn fixture() -> Fixture {
    let earth = EarthModel::default();
    let q = euler_to_quat(&EulerAngles::new(0.02, -0.01, 1.2));
    let nav = NavState { lat: 0.7, lon: 0.3, h: 100.0, v: Vec3::new(10.0, -2.0, 0.1), q };
    let cfg = EskfConfig::default();
    // a dense, well-conditioned covariance
    let l = Cov13::from_fn(|i, j| if i >= j { 1.0 / (1.0 + (i - j) as f64) } else { 0.0 });
    let p = l * l.transpose() * 1e-3;
    let dt = 0.01;
    let transition = build_transition(&nav.dcm(), 0.3, -0.1, &earth, nav.lat, dt).expect("away from the poles");
    let fix = GnssFix { t: 1.0, lat: nav.lat + 1e-7, lon: nav.lon - 1e-7, h: nav.h + 0.5, v: nav.v + Vec3::new(0.05, 0.0, -0.02) };
    let measurements = gnss_measurements(&nav, &fix, &cfg.gnss_noise, &earth);
    let samples = (0..10)
        .map(|k| {
            let s = (k as f64 * 0.3).sin();
            RawImuSample::new(Vec3::new(0.01 * s, 0.02, -0.01 * s), Vec3::new(0.1, 0.2 * s, -9.8), 1e-3)
                .expect("finite sample")
        })
        .collect();
    Fixture { nav, earth, p, transition, noise: cfg.process_noise, measurements, samples, dt }
}

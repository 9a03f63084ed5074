//! `run`: one filter over a dataset bundle, producing an estimate trace and
//! error metrics against truth.

use std::path::Path;

use clap::ValueEnum;
use strapnav::altfilt::{comp_step, gd_step, magnetic_reference};
use strapnav::eskf::{align_fix_epoch, POS, TILT, VEL};
use strapnav::geom::{dcm_to_euler_with, euler_to_quat, quat_to_dcm, quat_to_euler, rotvec_to_quat, wrap_pi, ArctanKind};
use strapnav::mech::mech_step;
use strapnav::sim::{gen_heading_reference, gen_magnetometer};
use strapnav::{
    CompFilterState, Cov13, EarthModel, Eskf, EskfConfig, EulerAngles, GdFilterState, GnssFix, GnssNoise, Increment,
    MechConfig, NavState, PiGains, Preprocessor, ProcessNoise, Quaternion, RawImuSample, RotationVector, SensorBiases,
    TruthSample, Vec3,
};

use crate::config::KeyValues;
use crate::error::{input, CliError, Result};
use crate::io::{self, ESTIMATE_COLUMNS, GNSS_COLUMNS, IMU_COLUMNS, TRUTH_COLUMNS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FilterKind {
    /// Unaided inertial navigation.
    Ins,
    /// 13-state error-state Kalman filter with GNSS aiding.
    Eskf,
    /// PI complementary attitude filter.
    Comp,
    /// Gradient-descent attitude filter.
    Gd,
}

impl FilterKind {
    fn parse(s: &str) -> Result<Self> {
        FilterKind::from_str(s, false).map_err(|_| input(format!("unknown filter {s:?}; expected ins, eskf, comp or gd")))
    }

    fn name(self) -> &'static str {
        match self {
            FilterKind::Ins => "ins",
            FilterKind::Eskf => "eskf",
            FilterKind::Comp => "comp",
            FilterKind::Gd => "gd",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub filter: FilterKind,
    pub l_per_m: usize,
    pub rotation_compensation: bool,
    pub earth: EarthModel,
    pub mech: MechConfig,
    pub atan: ArctanKind,
    /// Initial attitude error as a navigation-frame rotation vector, rad.
    pub init_tilt_error: Vec3,
    pub convergence_threshold: f64,
    pub eskf: EskfConfig,
    pub gnss_lag: f64,
    pub gains: PiGains,
    pub heading_sigma: f64,
    pub beta: f64,
    pub mag_inclination: f64,
    pub mag_sigma: f64,
}

impl RunConfig {
    /// Reads the keys relevant to the chosen filter; keys belonging to other
    /// filters are left unconsumed so that [`KeyValues::finish`] rejects them.
    pub fn from_kv(filter_flag: Option<FilterKind>, kv: &mut KeyValues, lat0: f64) -> Result<Self> {
        let from_file = if kv.has("filter") { Some(FilterKind::parse(&kv.required_str("filter")?)?) } else { None };
        let filter = filter_flag.or(from_file).ok_or_else(|| input("no filter given; use --filter or the filter key"))?;
        let inertial = matches!(filter, FilterKind::Ins | FilterKind::Eskf);
        let de = EarthModel::default();
        let mut earth = EarthModel { g_bar: kv.f64_or("gravity", de.g_bar)?, ..de };
        let mut mech = MechConfig::default();
        let mut rotation_compensation = true;
        if inertial {
            earth.r = kv.f64_or("earth_radius", de.r)?;
            earth.omega_e = kv.f64_or("earth_rate", de.omega_e)?;
            mech.full_coriolis = kv.bool_or("full_coriolis", false)?;
            rotation_compensation = kv.bool_or("rotation_compensation", true)?;
        }
        let mut cfg = RunConfig {
            filter,
            l_per_m: kv.usize_or("l_per_m", 10)?,
            rotation_compensation,
            earth,
            mech,
            atan: if kv.bool_or("polynomial_atan", false)? { ArctanKind::Polynomial } else { ArctanKind::Platform },
            init_tilt_error: kv.vec3_or("init_tilt_error", Vec3::zeros())?,
            convergence_threshold: kv.f64_or("convergence_threshold", 0.1f64.to_radians())?,
            eskf: EskfConfig { earth, mech, ..EskfConfig::default() },
            gnss_lag: 0.0,
            gains: PiGains::default(),
            heading_sigma: 0.0,
            beta: 0.1,
            mag_inclination: 60f64.to_radians(),
            mag_sigma: 0.0,
        };
        if cfg.l_per_m == 0 {
            return Err(input("l_per_m must be at least 1"));
        }
        match filter {
            FilterKind::Ins => {}
            FilterKind::Eskf => {
                cfg.eskf = eskf_config(kv, earth, mech, lat0)?;
                cfg.gnss_lag = kv.f64_or("gnss_lag", 0.0)?;
            }
            FilterKind::Comp => {
                let d = PiGains::default();
                cfg.gains = PiGains { kp: kv.f64_or("kp", d.kp)?, ki: kv.f64_or("ki", d.ki)? };
                cfg.heading_sigma = kv.f64_or("heading_sigma", 0.0)?;
                cfg.gnss_lag = kv.f64_or("gnss_lag", 0.0)?;
            }
            FilterKind::Gd => {
                cfg.beta = kv.f64_or("beta", cfg.beta)?;
                cfg.mag_inclination = kv.f64_or("mag_inclination", cfg.mag_inclination)?;
                cfg.mag_sigma = kv.f64_or("mag_sigma", 0.0)?;
            }
        }
        let sigmas = [cfg.heading_sigma, cfg.mag_sigma, cfg.beta, cfg.convergence_threshold];
        if sigmas.iter().any(|s| *s < 0.0) || cfg.gains.kp < 0.0 || cfg.gains.ki < 0.0 {
            return Err(input("gains, noise levels and thresholds must be non-negative"));
        }
        Ok(cfg)
    }
}

fn eskf_config(kv: &mut KeyValues, earth: EarthModel, mech: MechConfig, lat0: f64) -> Result<EskfConfig> {
    let d = EskfConfig::default();
    let gn = GnssNoise::default();
    let gnss_noise = GnssNoise { pos: kv.vec3_or("gnss_pos_sigma", gn.pos)?, vel: kv.vec3_or("gnss_vel_sigma", gn.vel)? };
    let sd = |i: usize| d.p0[i].sqrt();
    let bg = kv.vec3_or("p0_gyro_bias", Vec3::repeat(sd(0)))?;
    let az = kv.f64_or("p0_accel_z", sd(3))?;
    let tilt = kv.vec3_or("p0_tilt", Vec3::repeat(sd(TILT)))?;
    let vel = kv.vec3_or("p0_vel", Vec3::repeat(sd(VEL)))?;
    let pos = kv.vec3_or("p0_pos", gnss_noise.pos)?;
    let q = d.process_noise.0;
    let qbg = kv.vec3_or("q_gyro_bias", Vec3::repeat(q[0]))?;
    let qaz = kv.f64_or("q_accel_z", q[3])?;
    let qtilt = kv.vec3_or("q_tilt", Vec3::repeat(q[TILT]))?;
    let qvel = kv.vec3_or("q_vel", Vec3::repeat(q[VEL]))?;
    let qpos = kv.vec3_or("q_pos", Vec3::new(q[POS] * d.earth.r.powi(2), q[POS + 1] * d.earth.r.powi(2), q[POS + 2]))?;
    let all = [bg, tilt, vel, pos, qbg, qtilt, qvel, qpos, gnss_noise.pos, gnss_noise.vel];
    if all.iter().flat_map(|v| v.iter()).any(|x| *x < 0.0) || az < 0.0 || qaz < 0.0 {
        return Err(input("ESKF sigmas and noise levels must be non-negative"));
    }
    let (r, rc) = (earth.r, earth.r * lat0.cos());
    let p0 = [
        bg.x * bg.x, bg.y * bg.y, bg.z * bg.z, az * az,
        tilt.x * tilt.x, tilt.y * tilt.y, tilt.z * tilt.z,
        vel.x * vel.x, vel.y * vel.y, vel.z * vel.z,
        (pos.x / r).powi(2), (pos.y / rc).powi(2), pos.z * pos.z,
    ];
    let qn = [
        qbg.x, qbg.y, qbg.z, qaz, qtilt.x, qtilt.y, qtilt.z, qvel.x, qvel.y, qvel.z,
        qpos.x / (r * r), qpos.y / (rc * rc), qpos.z,
    ];
    Ok(EskfConfig { earth, mech, process_noise: ProcessNoise(qn), p0, gnss_noise })
}

/// A dataset read back from disk.
pub struct Bundle {
    pub imu: Vec<(f64, RawImuSample)>,
    pub gnss: Vec<GnssFix>,
    pub truth: Vec<TruthSample>,
    pub seed: u64,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let mut meta = KeyValues::load(&io::in_dir(dir, io::META_FILE))?;
    let seed = meta.u64_or("seed", 0)?;
    let truth_rows = io::read_table(&io::in_dir(dir, io::TRUTH_FILE), &TRUTH_COLUMNS)?;
    let imu_rows = io::read_table(&io::in_dir(dir, io::IMU_FILE), &IMU_COLUMNS)?;
    let gnss_rows = io::read_table(&io::in_dir(dir, io::GNSS_FILE), &GNSS_COLUMNS)?;
    if imu_rows.is_empty() || truth_rows.len() != imu_rows.len() + 1 {
        return Err(input(format!("{}: truth must have one more row than imu", dir.display())));
    }
    let truth: Vec<TruthSample> = truth_rows
        .iter()
        .map(|r| {
            let q = euler_to_quat(&EulerAngles::new(r[7], r[8], r[9]));
            let nav = NavState { lat: r[1], lon: r[2], h: r[3], v: Vec3::new(r[4], r[5], r[6]), q };
            TruthSample { t: r[0], nav, w: Vec3::zeros(), f: Vec3::zeros() }
        })
        .collect();
    let mut imu = Vec::with_capacity(imu_rows.len());
    for (k, r) in imu_rows.iter().enumerate() {
        if !same_time(r[0], truth[k + 1].t) {
            return Err(input(format!("imu row {} at t = {} does not match truth t = {}", k + 2, r[0], truth[k + 1].t)));
        }
        let dt = r[0] - truth[k].t;
        let s = RawImuSample::new(Vec3::new(r[1], r[2], r[3]), Vec3::new(r[4], r[5], r[6]), dt)
            .map_err(|e| input(format!("imu row {}: {e}", k + 2)))?;
        imu.push((r[0], s));
    }
    let gnss = gnss_rows
        .iter()
        .map(|r| GnssFix { t: r[0], lat: r[1], lon: r[2], h: r[3], v: Vec3::new(r[4], r[5], r[6]) })
        .collect();
    Ok(Bundle { imu, gnss, truth, seed })
}

/// One output epoch: the row as written plus the exact attitude for metrics.
struct Epoch {
    row: [f64; ESTIMATE_COLUMNS.len()],
    q: Quaternion,
    nav: Option<NavState>,
}

fn epoch(t: f64, q: &Quaternion, nav: Option<&NavState>, biases: [f64; 4], p: Option<&Cov13>, atan: ArctanKind) -> Epoch {
    let e = dcm_to_euler_with(&quat_to_dcm(q), atan);
    let mut row = [f64::NAN; ESTIMATE_COLUMNS.len()];
    row[0] = t;
    if let Some(n) = nav {
        row[1..7].copy_from_slice(&[n.lat, n.lon, n.h, n.v.x, n.v.y, n.v.z]);
    }
    row[7..10].copy_from_slice(&[e.roll, e.pitch, e.heading]);
    row[10..14].copy_from_slice(&biases);
    if let Some(p) = p {
        for i in 0..13 {
            row[14 + i] = p[(i, i)];
        }
    }
    Epoch { row, q: *q, nav: nav.copied() }
}

fn nav_finite(n: &NavState) -> bool {
    [n.lat, n.lon, n.h, n.q.q0, n.q.q1, n.q.q2, n.q.q3].iter().chain(n.v.iter()).all(|x| x.is_finite())
}

/// Fixes grouped by the propagation epoch they are applied at.
struct FixSchedule<'a> {
    fixes: &'a [GnssFix],
    epochs: Vec<Option<usize>>,
    next: usize,
}

impl<'a> FixSchedule<'a> {
    fn new(fixes: &'a [GnssFix], lag: f64, t0: f64, period: f64) -> Self {
        let epochs = fixes.iter().map(|f| align_fix_epoch(f.t, lag, t0, period)).collect();
        Self { fixes, epochs, next: 0 }
    }

    /// Fixes aligned to epoch `j`; earlier ones that were never reached are skipped.
    fn due(&mut self, j: usize) -> Vec<&'a GnssFix> {
        let mut out = Vec::new();
        while self.next < self.fixes.len() {
            match self.epochs[self.next] {
                Some(e) if e > j => break,
                Some(e) if e == j => out.push(&self.fixes[self.next]),
                _ => {}
            }
            self.next += 1;
        }
        out
    }
}

struct Trace {
    epochs: Vec<Epoch>,
    failure: Option<CliError>,
}

impl Trace {
    fn diverge(&mut self, t: f64, reason: impl std::fmt::Display) {
        let last_good = self.epochs.last().map_or(f64::NAN, |e| e.row[0]);
        self.failure = Some(CliError::Diverged { t, last_good, reason: reason.to_string() });
    }
}

fn initial_nav(b: &Bundle, cfg: &RunConfig) -> NavState {
    let mut nav = b.truth[0].nav;
    nav.q = rotvec_to_quat(&RotationVector(cfg.init_tilt_error)) * nav.q;
    nav
}

fn run_inertial(b: &Bundle, cfg: &RunConfig) -> Trace {
    let t0 = b.truth[0].t;
    let period = b.imu[0].1.dt * cfg.l_per_m as f64;
    let mut sched = FixSchedule::new(&b.gnss, cfg.gnss_lag, t0, period);
    let mut pre = Preprocessor::new(cfg.l_per_m, cfg.rotation_compensation).expect("l_per_m validated");
    let aided = cfg.filter == FilterKind::Eskf;
    let mut f = Eskf::new(initial_nav(b, cfg), cfg.eskf);
    let mut trace = Trace { epochs: Vec::new(), failure: None };
    let snapshot = |f: &Eskf, t: f64| {
        let bias = [f.biases.gyro.0.x, f.biases.gyro.0.y, f.biases.gyro.0.z, f.biases.accel_z];
        if aided {
            epoch(t, &f.nav.q, Some(&f.nav), bias, Some(&f.p), cfg.atan)
        } else {
            epoch(t, &f.nav.q, Some(&f.nav), [0.0; 4], None, cfg.atan)
        }
    };
    for fix in sched.due(0) {
        if aided {
            if let Err(e) = f.update(fix) {
                trace.diverge(t0, e);
                return trace;
            }
        }
    }
    trace.epochs.push(snapshot(&f, t0));
    let mut step = |f: &mut Eskf, inc: &Increment, j: usize, t: f64, trace: &mut Trace| -> bool {
        let r = if aided {
            f.propagate(inc).map(|_| ()).map_err(|e| e.to_string())
        } else {
            mech_step(&f.nav, &inc.phi, &inc.dv, inc.dt, &cfg.earth, &cfg.mech).map(|s| f.nav = s.nav).map_err(|e| e.to_string())
        };
        if let Err(e) = r {
            trace.diverge(t, e);
            return false;
        }
        for fix in sched.due(j) {
            if aided {
                if let Err(e) = f.update(fix) {
                    trace.diverge(t, e);
                    return false;
                }
            }
        }
        if !nav_finite(&f.nav) {
            trace.diverge(t, "non-finite navigation state");
            return false;
        }
        trace.epochs.push(snapshot(f, t));
        true
    };
    let mut j = 0;
    for (t, s) in &b.imu {
        let biases = if aided { f.biases } else { SensorBiases::default() };
        if let Some(inc) = pre.push(s, &biases) {
            j += 1;
            if !step(&mut f, &inc, j, *t, &mut trace) {
                return trace;
            }
        }
    }
    if let Some(inc) = pre.flush() {
        j += 1;
        let t = b.imu.last().expect("bundle has imu rows").0;
        step(&mut f, &inc, j, t, &mut trace);
    }
    trace
}

fn emits(k: usize, n: usize, l_per_m: usize) -> bool {
    (k + 1).is_multiple_of(l_per_m) || k + 1 == n
}

fn run_attitude(b: &Bundle, cfg: &RunConfig) -> Trace {
    let t0 = b.truth[0].t;
    let q0 = initial_nav(b, cfg).q;
    let mut trace = Trace { epochs: Vec::new(), failure: None };
    let n = b.imu.len();
    match cfg.filter {
        FilterKind::Comp => {
            let headings = gen_heading_reference(&b.truth, cfg.heading_sigma, b.seed);
            let mut s = CompFilterState::new(q0);
            let mut fix = 0;
            let mut v_ref = Vec3::zeros();
            trace.epochs.push(epoch(t0, &s.q, None, [0.0; 4], None, cfg.atan));
            for (k, (t, smp)) in b.imu.iter().enumerate() {
                while fix < b.gnss.len() && b.gnss[fix].t - cfg.gnss_lag <= *t + 1e-9 {
                    v_ref = b.gnss[fix].v;
                    fix += 1;
                }
                let v_body = quat_to_dcm(&s.q).0.transpose() * v_ref;
                match comp_step(&s, &smp.w, &smp.f, &v_body, headings[k], &cfg.gains, smp.dt, cfg.earth.g_bar) {
                    Ok((next, _)) => s = next,
                    Err(e) => {
                        trace.diverge(*t, e);
                        return trace;
                    }
                }
                if emits(k, n, cfg.l_per_m) {
                    let b = s.bias_estimate;
                    trace.epochs.push(epoch(*t, &s.q, None, [b.x, b.y, b.z, f64::NAN], None, cfg.atan));
                }
            }
        }
        FilterKind::Gd => {
            let mag_ref = magnetic_reference(cfg.mag_inclination);
            let mags = gen_magnetometer(&b.truth, &mag_ref, cfg.mag_sigma, b.seed);
            let mut s = GdFilterState { q: q0, beta: cfg.beta };
            trace.epochs.push(epoch(t0, &s.q, None, [f64::NAN; 4], None, cfg.atan));
            for (k, (t, smp)) in b.imu.iter().enumerate() {
                match gd_step(&s, &smp.w, &smp.f, &mags[k], &mag_ref, smp.dt) {
                    Ok((next, _)) => s = next,
                    Err(e) => {
                        trace.diverge(*t, e);
                        return trace;
                    }
                }
                if emits(k, n, cfg.l_per_m) {
                    trace.epochs.push(epoch(*t, &s.q, None, [f64::NAN; 4], None, cfg.atan));
                }
            }
        }
        FilterKind::Ins | FilterKind::Eskf => unreachable!("inertial filters use run_inertial"),
    }
    trace
}

/// Metric names in file order.
pub const METRICS: [&str; 11] = [
    "epochs",
    "attitude_rms",
    "attitude_final",
    "attitude_max_second_half",
    "attitude_convergence_time",
    "attitude_tilt_rms",
    "attitude_heading_rms",
    "velocity_rms",
    "velocity_final",
    "position_rms",
    "position_final",
];

fn metrics(epochs: &[Epoch], b: &Bundle, cfg: &RunConfig) -> Result<Vec<f64>> {
    let t0 = b.truth[0].t;
    let dt = b.imu[0].1.dt;
    let mut att = Vec::with_capacity(epochs.len());
    let mut tilt = Vec::with_capacity(epochs.len());
    let mut heading = Vec::with_capacity(epochs.len());
    let mut vel = Vec::new();
    let mut pos = Vec::new();
    for e in epochs {
        let t = e.row[0];
        let idx = ((t - t0) / dt).round() as usize;
        let truth = b.truth.get(idx).filter(|s| same_time(s.t, t)).ok_or_else(|| input(format!("no truth epoch at t = {t}")))?;
        att.push(e.q.angle_to(&truth.nav.q));
        // angle between estimated and true body-frame down directions
        let down = |q: &Quaternion| quat_to_dcm(q).0.transpose() * Vec3::z();
        tilt.push(down(&e.q).angle(&down(&truth.nav.q)));
        heading.push(wrap_pi(quat_to_euler(&e.q).heading - truth.nav.euler().heading));
        if let Some(n) = &e.nav {
            vel.push((n.v - truth.nav.v).norm());
            let r = cfg.earth.r;
            let d = Vec3::new((n.lat - truth.nav.lat) * r, (n.lon - truth.nav.lon) * r * truth.nav.lat.cos(), truth.nav.h - n.h);
            pos.push(d.norm());
        }
    }
    let rms = |x: &[f64]| if x.is_empty() { f64::NAN } else { (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt() };
    let last = |x: &[f64]| x.last().copied().unwrap_or(f64::NAN);
    let half_max = att[att.len() / 2..].iter().cloned().fold(0.0, f64::max);
    let converged = att.iter().rposition(|a| *a > cfg.convergence_threshold).map_or(Some(0), |i| (i + 1 < att.len()).then_some(i + 1));
    let conv_time = converged.map_or(f64::NAN, |i| epochs[i].row[0] - t0);
    Ok(vec![epochs.len() as f64, rms(&att), last(&att), half_max, conv_time, rms(&tilt), rms(&heading), rms(&vel), last(&vel), rms(&pos), last(&pos)])
}

pub fn cmd_run(filter: Option<FilterKind>, config: Option<&Path>, overrides: &[String], inp: &Path, out: &Path) -> Result<()> {
    let mut kv = match config {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::parse("", "configuration")?,
    };
    for o in overrides {
        kv.set(o)?;
    }
    let bundle = load_bundle(inp)?;
    let cfg = RunConfig::from_kv(filter, &mut kv, bundle.truth[0].nav.lat)?;
    kv.finish(&format!("by filter {}", cfg.filter.name()))?;

    let trace = match cfg.filter {
        FilterKind::Ins | FilterKind::Eskf => run_inertial(&bundle, &cfg),
        FilterKind::Comp | FilterKind::Gd => run_attitude(&bundle, &cfg),
    };
    io::create_dir(out)?;
    io::write_table(&io::in_dir(out, io::ESTIMATE_FILE), &ESTIMATE_COLUMNS, trace.epochs.iter().map(|e| e.row))?;
    let metrics_path = io::in_dir(out, io::METRICS_FILE);
    if let Some(err) = trace.failure {
        // leave no metrics from an earlier run next to a partial trace
        match std::fs::remove_file(&metrics_path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(CliError::Io { path: metrics_path, source: e }),
            _ => return Err(err),
        }
    }
    let values = metrics(&trace.epochs, &bundle, &cfg)?;
    io::write_metrics(&metrics_path, &METRICS.iter().copied().zip(values).collect::<Vec<_>>())
}

//! `sim`: truth, corrupted IMU and GNSS files from three spec files.

use std::path::Path;

use strapnav::mech::EarthModel;
use strapnav::sim::{corrupt_imu, gen_gnss, gen_truth, AxisErrors, InitialPose, TrajectoryKind};
use strapnav::{EulerAngles, GnssSpec, SensorErrorSpec, TrajectorySpec, Vec3};

use crate::config::KeyValues;
use crate::error::{input, Result};
use crate::io::{self, GNSS_COLUMNS, IMU_COLUMNS, TRUTH_COLUMNS};

pub fn trajectory_spec(kv: &mut KeyValues) -> Result<TrajectorySpec> {
    let name = kv.required_str("kind")?;
    let kind = match name.as_str() {
        "stationary" => TrajectoryKind::Stationary,
        "constant_rate" => TrajectoryKind::ConstantRate { axis: kv.vec3_or("axis", Vec3::z())?, rate: kv.required_f64("turn_rate")? },
        "coning" => TrajectoryKind::Coning { amplitude: kv.required_f64("amplitude")?, frequency: kv.required_f64("frequency")? },
        "sculling" => TrajectoryKind::Sculling {
            angle_amplitude: kv.required_f64("amplitude")?,
            accel_amplitude: kv.required_f64("accel_amplitude")?,
            frequency: kv.required_f64("frequency")?,
        },
        "circular" => TrajectoryKind::Circular { radius: kv.required_f64("radius")?, speed: kv.required_f64("speed")? },
        "accelerate" => TrajectoryKind::Accelerate {
            accel: kv.vec3_or("accel", Vec3::zeros())?,
            start: kv.f64_or("start", 0.0)?,
            duration: kv.required_f64("burst")?,
        },
        other => return Err(input(format!("unsupported trajectory kind {other:?}"))),
    };
    let initial = InitialPose {
        lat: kv.f64_or("lat", 0.0)?,
        lon: kv.f64_or("lon", 0.0)?,
        h: kv.f64_or("h", 0.0)?,
        attitude: EulerAngles::new(kv.f64_or("roll", 0.0)?, kv.f64_or("pitch", 0.0)?, kv.f64_or("heading", 0.0)?),
    };
    let spec = TrajectorySpec { kind, duration: kv.required_f64("duration")?, rate: kv.required_f64("rate")?, initial };
    spec.validate().map_err(|e| input(e.to_string()))?;
    Ok(spec)
}

fn axis_errors(kv: &mut KeyValues, prefix: &str) -> Result<AxisErrors> {
    let key = |k: &str| format!("{prefix}_{k}");
    Ok(AxisErrors {
        bias: kv.vec3_or(&key("bias"), Vec3::zeros())?,
        white: kv.vec3_or(&key("white"), Vec3::zeros())?,
        instability: kv.vec3_or(&key("instability"), Vec3::zeros())?,
        tau: kv.f64_or(&key("tau"), 0.0)?,
        random_walk: kv.vec3_or(&key("random_walk"), Vec3::zeros())?,
    })
}

pub fn error_spec(kv: &mut KeyValues, seed: u64) -> Result<SensorErrorSpec> {
    let spec = SensorErrorSpec { gyro: axis_errors(kv, "gyro")?, accel: axis_errors(kv, "accel")?, seed };
    spec.validate().map_err(|e| input(e.to_string()))?;
    Ok(spec)
}

pub fn gnss_spec(kv: &mut KeyValues) -> Result<GnssSpec> {
    let d = GnssSpec::default();
    let spec = GnssSpec {
        rate: kv.f64_or("rate", d.rate)?,
        pos_sigma: kv.vec3_or("pos_sigma", d.pos_sigma)?,
        vel_sigma: kv.vec3_or("vel_sigma", d.vel_sigma)?,
        skew: kv.f64_or("skew", d.skew)?,
    };
    spec.validate().map_err(|e| input(e.to_string()))?;
    Ok(spec)
}

fn load_or_empty(path: Option<&Path>, what: &str) -> Result<KeyValues> {
    path.map_or_else(|| KeyValues::parse("", what), KeyValues::load)
}

pub fn cmd_sim(traj: &Path, err: Option<&Path>, gnss: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let mut tk = KeyValues::load(traj)?;
    let traj_spec = trajectory_spec(&mut tk)?;
    tk.finish(&format!("by trajectory kind {:?}", traj_spec.kind))?;
    let mut ek = load_or_empty(err, "sensor-error spec")?;
    let err_spec = error_spec(&mut ek, seed)?;
    ek.finish("in the sensor-error spec")?;
    let mut gk = load_or_empty(gnss, "GNSS spec")?;
    let gnss_spec = gnss_spec(&mut gk)?;
    gk.finish("in the GNSS spec")?;

    let earth = EarthModel::default();
    let truth = gen_truth(&traj_spec, &earth).map_err(|e| input(e.to_string()))?;
    let imu = corrupt_imu(&truth, &err_spec).map_err(|e| input(e.to_string()))?;
    let fixes = gen_gnss(&truth, &gnss_spec, seed, &earth).map_err(|e| input(e.to_string()))?;

    io::create_dir(out)?;
    io::write_table(
        &io::in_dir(out, io::IMU_FILE),
        &IMU_COLUMNS,
        imu.iter().map(|r| {
            let (w, f) = (r.sample.w, r.sample.f);
            [r.t, w.x, w.y, w.z, f.x, f.y, f.z]
        }),
    )?;
    io::write_table(
        &io::in_dir(out, io::GNSS_FILE),
        &GNSS_COLUMNS,
        fixes.iter().map(|f| [f.t, f.lat, f.lon, f.h, f.v.x, f.v.y, f.v.z]),
    )?;
    io::write_table(
        &io::in_dir(out, io::TRUTH_FILE),
        &TRUTH_COLUMNS,
        truth.iter().map(|s| {
            let (n, e) = (s.nav, s.nav.euler());
            [s.t, n.lat, n.lon, n.h, n.v.x, n.v.y, n.v.z, e.roll, e.pitch, e.heading]
        }),
    )?;
    let meta = format!(
        "imu_rate = {}\nduration = {}\nimu_rows = {}\ngnss_rows = {}\ngnss_rate = {}\ngnss_skew = {}\nseed = {}\n",
        traj_spec.rate,
        traj_spec.duration,
        imu.len(),
        fixes.len(),
        gnss_spec.rate,
        gnss_spec.skew,
        seed
    );
    io::write_text(&io::in_dir(out, io::META_FILE), &meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_specific_keys_are_required() {
        let mut kv = KeyValues::parse("kind = coning\nduration = 1\nrate = 100\namplitude = 0.1\n", "t").unwrap();
        assert!(trajectory_spec(&mut kv).unwrap_err().to_string().contains("frequency"));
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let mut kv = KeyValues::parse("kind = helix\nduration = 1\nrate = 100\n", "t").unwrap();
        assert!(trajectory_spec(&mut kv).is_err());
    }

    #[test]
    fn datasheet_units_are_accepted() {
        let mut kv = KeyValues::parse("gyro_bias = 0.1, 0, 0 deg/s\naccel_white = 60 m/s/rt-hr\n", "t").unwrap();
        let s = error_spec(&mut kv, 1).unwrap();
        assert!((s.gyro.bias.x - 0.1f64.to_radians()).abs() < 1e-18);
        assert_eq!(s.accel.white, Vec3::repeat(1.0));
    }
}

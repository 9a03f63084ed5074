//! Attitude representations and frame relations.
//!
//! The stored direction cosine matrix is always `C_b^n` (body to NED).
//! Quaternions are scalar-first and describe the same body-to-NED rotation,
//! so `q.rotate(v) == quat_to_dcm(q) * v`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Three-vector used for rates, increments and NED quantities.
pub type Vec3 = Vector3<f64>;

/// Largest `|fast_atan2 - atan|` over the regression sweep in
/// [`atan_regression_sweep`]. Measured once by an independent evaluation of
/// the polynomial against a reference arctangent and locked here.
pub const FAST_ATAN2_MAX_ERROR: f64 = 2.829160586559354e-05;

/// `|c31|` at or above this value is treated as gimbal lock.
pub const GIMBAL_LOCK_THRESHOLD: f64 = 1.0 - 1e-12;

/// Below this rotation angle the half-angle form switches to its series.
const SMALL_ANGLE: f64 = 1e-4;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeomError {
    #[error("quaternion norm squared {0} outside the first-order normalization domain [0.9, 1.1]")]
    NormOutOfRange(f64),
    #[error("arctangent undefined at (0, 0)")]
    AtanDomain,
}

/// Skew-symmetric cross-product matrix, `skew(a) * b == a × b`.
pub fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Scalar-first unit quaternion (body to NED).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { q0: 1.0, q1: 0.0, q2: 0.0, q3: 0.0 };

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Self { q0, q1, q2, q3 }
    }

    pub fn from_parts(scalar: f64, vector: Vec3) -> Self {
        Self::new(scalar, vector.x, vector.y, vector.z)
    }

    pub fn scalar(&self) -> f64 {
        self.q0
    }

    pub fn vector(&self) -> Vec3 {
        Vec3::new(self.q1, self.q2, self.q3)
    }

    pub fn norm_squared(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    /// Exact normalization by division. Use [`quat_normalize`] inside
    /// integration loops.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.q0 / n, self.q1 / n, self.q2 / n, self.q3 / n)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.q0 * k, self.q1 * k, self.q2 * k, self.q3 * k)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.q0 + o.q0, self.q1 + o.q1, self.q2 + o.q2, self.q3 + o.q3)
    }

    /// Rotates a body-frame vector into the navigation frame.
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        quat_to_dcm(self).0 * v
    }

    /// Rotation angle of `self⁻¹ ⊗ other`, in `[0, π]`. Insensitive to sign.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        let d = self.conjugate() * *other;
        let w = d.q0.abs().min(1.0);
        2.0 * d.vector().norm().atan2(w)
    }

    /// Rotation vector of this quaternion (inverse of [`rotvec_to_quat`]).
    pub fn to_rotation_vector(&self) -> RotationVector {
        let q = if self.q0 < 0.0 { self.scale(-1.0) } else { *self };
        let v = q.vector();
        let s = v.norm();
        if s < 1e-12 {
            return RotationVector(v * 2.0);
        }
        let angle = 2.0 * s.atan2(q.q0);
        RotationVector(v * (angle / s))
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product.
    fn mul(self, r: Quaternion) -> Quaternion {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (r.q0, r.q1, r.q2, r.q3);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

/// Direction cosine matrix `C_b^n`, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dcm(pub Matrix3<f64>);

impl Dcm {
    pub fn identity() -> Self {
        Dcm(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Element by one-based index, `c(3, 1) == c31`.
    pub fn c(&self, row: usize, col: usize) -> f64 {
        self.0[(row - 1, col - 1)]
    }

    pub fn transpose(&self) -> Dcm {
        Dcm(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Max element of `|C·Cᵀ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).abs().max()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.orthonormality_error() <= tol && (self.0.determinant() - 1.0).abs() <= tol
    }
}

/// Aerospace zyx Euler angles, radians.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub heading: f64,
}

impl EulerAngles {
    pub const fn new(roll: f64, pitch: f64, heading: f64) -> Self {
        Self { roll, pitch, heading }
    }

    pub fn from_degrees(roll: f64, pitch: f64, heading: f64) -> Self {
        Self::new(roll.to_radians(), pitch.to_radians(), heading.to_radians())
    }
}

/// Rotation vector: direction is the axis, magnitude the angle in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RotationVector(pub Vec3);

impl RotationVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RotationVector(Vec3::new(x, y, z))
    }

    pub fn angle(&self) -> f64 {
        self.0.norm()
    }
}

/// Which arctangent [`dcm_to_euler_with`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ArctanKind {
    /// Platform `atan`, full double precision.
    #[default]
    Platform,
    /// Ninth-order polynomial of [`fast_atan2`].
    Polynomial,
}

/// Single-axis rotation about x, nav-to-body sense.
pub fn rot_x(phi: f64) -> Matrix3<f64> {
    let (s, c) = phi.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

/// Single-axis rotation about y, nav-to-body sense.
pub fn rot_y(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// Single-axis rotation about z, nav-to-body sense.
pub fn rot_z(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `C_b^n` from Euler angles: the transpose of `C_x(φ)·C_y(θ)·C_z(ψ)`.
pub fn euler_to_dcm(e: &EulerAngles) -> Dcm {
    let c_nb = rot_x(e.roll) * rot_y(e.pitch) * rot_z(e.heading);
    Dcm(c_nb.transpose())
}

/// Roll, pitch and heading from `C_b^n` using the platform arctangent.
pub fn dcm_to_euler(c: &Dcm) -> EulerAngles {
    dcm_to_euler_with(c, ArctanKind::Platform)
}

fn reduced_atan(c1: f64, c2: f64, kind: ArctanKind) -> f64 {
    match kind {
        ArctanKind::Platform => {
            if c2 == 0.0 {
                FRAC_PI_2.copysign(c1)
            } else {
                (c1 / c2).atan()
            }
        }
        // Callers never pass (0, 0): the zero-denominator branches are
        // handled before the arctangent is needed.
        ArctanKind::Polynomial => fast_atan2(c1, c2).unwrap_or(0.0),
    }
}

/// Roll, pitch and heading from `C_b^n` with quadrant handling and a pitch
/// clamp at gimbal lock. Roll is wrapped to `(−π, π]`, heading to `[0, 2π)`.
pub fn dcm_to_euler_with(c: &Dcm, kind: ArctanKind) -> EulerAngles {
    // roll
    let (c1, c2) = (c.c(3, 2), c.c(3, 3));
    let mut roll = if c2 > 0.0 {
        reduced_atan(c1, c2, kind)
    } else if c2 < 0.0 {
        let a = reduced_atan(c1, c2, kind);
        if c1 > 0.0 {
            a + PI
        } else {
            a - PI
        }
    } else if c1 >= 0.0 {
        FRAC_PI_2
    } else {
        -FRAC_PI_2
    };
    if roll > PI {
        roll -= TAU;
    }
    if roll <= -PI {
        roll += TAU;
    }

    // pitch: c31 = -sin θ for C_b^n
    let s = -c.c(3, 1);
    let pitch = if s.abs() >= GIMBAL_LOCK_THRESHOLD {
        FRAC_PI_2.copysign(s)
    } else {
        let cos_pitch = (1.0 - s * s).sqrt();
        reduced_atan(s, cos_pitch, kind)
    };

    // heading
    let (c1, c2) = (c.c(2, 1), c.c(1, 1));
    let mut heading = if c2 == 0.0 {
        if c1 >= 0.0 {
            FRAC_PI_2
        } else {
            3.0 * FRAC_PI_2
        }
    } else {
        let a = reduced_atan(c1, c2, kind);
        if c2 > 0.0 {
            a
        } else if c1 >= 0.0 {
            a + PI
        } else {
            a - PI
        }
    };
    if heading < 0.0 {
        heading += TAU;
    }
    if heading >= TAU {
        heading -= TAU;
    }
    EulerAngles { roll, pitch, heading }
}

/// `C_b^n` from a unit quaternion (19-product form).
pub fn quat_to_dcm(q: &Quaternion) -> Dcm {
    let q00 = q.q0 * q.q0;
    let q11 = q.q1 * q.q1;
    let q22 = q.q2 * q.q2;
    let q33 = q.q3 * q.q3;
    let q01 = q.q0 * q.q1;
    let q02 = q.q0 * q.q2;
    let q03 = q.q0 * q.q3;
    let q12 = q.q1 * q.q2;
    let q13 = q.q1 * q.q3;
    let q23 = q.q2 * q.q3;
    Dcm(Matrix3::new(
        q00 + q11 - q22 - q33,
        (q12 - q03) * 2.0,
        (q13 + q02) * 2.0,
        (q12 + q03) * 2.0,
        q00 - q11 + q22 - q33,
        (q23 - q01) * 2.0,
        (q13 - q02) * 2.0,
        (q23 + q01) * 2.0,
        q00 - q11 - q22 + q33,
    ))
}

/// Quaternion from `C_b^n` (Shepperd's method), scalar part non-negative.
pub fn dcm_to_quat(c: &Dcm) -> Quaternion {
    let m = &c.0;
    let tr = m.trace();
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        Quaternion::new(
            0.25 * s,
            (m[(2, 1)] - m[(1, 2)]) / s,
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(1, 0)] - m[(0, 1)]) / s,
        )
    } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
        let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
        Quaternion::new(
            (m[(2, 1)] - m[(1, 2)]) / s,
            0.25 * s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
        )
    } else if m[(1, 1)] > m[(2, 2)] {
        let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
        Quaternion::new(
            (m[(0, 2)] - m[(2, 0)]) / s,
            (m[(0, 1)] + m[(1, 0)]) / s,
            0.25 * s,
            (m[(1, 2)] + m[(2, 1)]) / s,
        )
    } else {
        let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
        Quaternion::new(
            (m[(1, 0)] - m[(0, 1)]) / s,
            (m[(0, 2)] + m[(2, 0)]) / s,
            (m[(1, 2)] + m[(2, 1)]) / s,
            0.25 * s,
        )
    };
    let q = if q.q0 < 0.0 { q.scale(-1.0) } else { q };
    q.normalized()
}

pub fn euler_to_quat(e: &EulerAngles) -> Quaternion {
    dcm_to_quat(&euler_to_dcm(e))
}

pub fn quat_to_euler(q: &Quaternion) -> EulerAngles {
    dcm_to_euler(&quat_to_dcm(q))
}

/// Quaternion of a rotation vector. Exact half-angle form, switching to the
/// fourth-order series for tiny angles so the zero vector maps exactly to
/// the identity.
pub fn rotvec_to_quat(phi: &RotationVector) -> Quaternion {
    let v = phi.0;
    let d2 = v.norm_squared();
    let angle = d2.sqrt();
    if angle < SMALL_ANGLE {
        let d4 = d2 * d2;
        let s = 0.5 - d2 / 48.0 + d4 / 3840.0;
        let c = 1.0 - d2 / 8.0 + d4 / 384.0;
        Quaternion::from_parts(c, v * s)
    } else {
        let half = 0.5 * angle;
        Quaternion::from_parts(half.cos(), v * (half.sin() / angle))
    }
}

/// First-order normalization: each component scaled by `0.5·(3 − ‖q‖²)`.
pub fn quat_normalize(q: &Quaternion) -> Result<Quaternion, GeomError> {
    let qq = q.norm_squared();
    if !(0.9..=1.1).contains(&qq) {
        return Err(GeomError::NormOutOfRange(qq));
    }
    Ok(q.scale(0.5 * (3.0 - qq)))
}

/// Polynomial arctangent of `c1 / c2` in `[−π/2, π/2]`.
///
/// The ratio is reduced to `|r| ≤ 1` before evaluating the odd ninth-order
/// polynomial; the complementary octants use `±π/2 − atan(1/r)`. A zero
/// denominator returns `±π/2` with the sign of `c1`.
pub fn fast_atan2(c1: f64, c2: f64) -> Result<f64, GeomError> {
    if c1 == 0.0 && c2 == 0.0 {
        return Err(GeomError::AtanDomain);
    }
    let swapped = c1.abs() >= c2.abs();
    // |c1| == |c2| gives r = ±1 exactly; the division already carries the sign.
    let r1 = if swapped { c2 / c1 } else { c1 / c2 };
    let r2 = r1 * r1;
    let r3 = r1 * r2;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let r9 = r7 * r2;
    let ang = 0.999896 * r1 - 0.330756 * r3 + 0.181946 * r5 - 0.0876858 * r7 + 0.021997 * r9;
    if !swapped {
        return Ok(ang);
    }
    Ok(if ang > 0.0 {
        FRAC_PI_2 - ang
    } else if ang < 0.0 {
        -FRAC_PI_2 - ang
    } else {
        FRAC_PI_2.copysign(c1)
    })
}

/// Max `|fast_atan2 − atan2|` over `n` angles evenly spaced inside
/// `(−π/2, π/2)`, evaluated at `(sin θ, cos θ)`.
pub fn atan_regression_sweep(n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let th = -FRAC_PI_2 + PI * (k as f64 + 0.5) / n as f64;
            let (s, c) = th.sin_cos();
            (fast_atan2(s, c).expect("nonzero point") - s.atan2(c)).abs()
        })
        .fold(0.0, f64::max)
}

/// `C_n^e` for a given latitude and longitude.
pub fn cne(lat: f64, lon: f64) -> Dcm {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    Dcm(Matrix3::new(-sl * co, -so, -cl * co, -sl * so, co, -cl * so, cl, 0.0, -sl))
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn zero_euler_is_identity() {
        let c = euler_to_dcm(&EulerAngles::default());
        assert!(max_abs(&c.0, &Matrix3::identity()) == 0.0);
    }

    #[test]
    fn pure_yaw_is_transposed_z_rotation() {
        let c = euler_to_dcm(&EulerAngles::new(0.0, 0.0, FRAC_PI_2));
        assert!(max_abs(&c.0, &rot_z(FRAC_PI_2).transpose()) < 1e-15);
        // body x now points east
        let east = c.apply(&Vec3::x());
        assert_abs_diff_eq!(east, Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn stated_round_trip() {
        let e = EulerAngles::new(0.3, -0.2, 4.0);
        let back = dcm_to_euler(&euler_to_dcm(&e));
        assert_abs_diff_eq!(back.roll, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(back.pitch, -0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(back.heading, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn identity_to_zero_angles() {
        for kind in [ArctanKind::Platform, ArctanKind::Polynomial] {
            let e = dcm_to_euler_with(&Dcm::identity(), kind);
            assert_eq!((e.roll, e.pitch, e.heading), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn pitch_clamps_past_unity() {
        let mut c = Dcm::identity();
        c.0[(2, 0)] = 1.0000002;
        c.0[(0, 0)] = 0.0;
        c.0[(2, 2)] = 0.0;
        let e = dcm_to_euler(&c);
        assert_eq!(e.pitch.abs(), FRAC_PI_2);
        c.0[(2, 0)] = -1.0000002;
        assert_eq!(dcm_to_euler(&c).pitch, FRAC_PI_2);
    }

    #[test]
    fn roll_wraps_into_half_open_interval() {
        // roll = π exactly lands on +π, never −π
        let c = euler_to_dcm(&EulerAngles::new(PI, 0.0, 0.0));
        let e = dcm_to_euler(&c);
        assert_abs_diff_eq!(e.roll, PI, epsilon = 1e-12);
        assert!(e.roll > 0.0);
    }

    #[test]
    fn polynomial_path_is_close() {
        let e = EulerAngles::new(-2.5, 0.7, 5.9);
        let back = dcm_to_euler_with(&euler_to_dcm(&e), ArctanKind::Polynomial);
        assert!((back.roll - e.roll).abs() < 3e-5);
        assert!((back.pitch - e.pitch).abs() < 3e-5);
        assert!((back.heading - e.heading).abs() < 3e-5);
    }

    #[test]
    fn identity_quaternion_to_identity_dcm() {
        assert_eq!(quat_to_dcm(&Quaternion::IDENTITY).0, Matrix3::identity());
    }

    #[test]
    fn quarter_turn_quaternion_matches_euler_path() {
        let h = std::f64::consts::FRAC_PI_4;
        let q = Quaternion::new(h.cos(), 0.0, 0.0, h.sin());
        let from_euler = euler_to_dcm(&EulerAngles::new(0.0, 0.0, FRAC_PI_2));
        assert!(max_abs(&quat_to_dcm(&q).0, &from_euler.0) < 1e-15);
    }

    #[test]
    fn rotvec_zero_and_half_turn() {
        assert_eq!(rotvec_to_quat(&RotationVector::default()), Quaternion::IDENTITY);
        let q = rotvec_to_quat(&RotationVector::new(PI, 0.0, 0.0));
        assert_abs_diff_eq!(q.q0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.q1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotvec_tiny_angle_matches_series() {
        let v = Vec3::new(0.6e-9, -0.8e-9, 0.0);
        let q = rotvec_to_quat(&RotationVector(v));
        let d2 = v.norm_squared();
        let r = 0.5 - d2 / 48.0 + d2 * d2 / 3840.0;
        assert_abs_diff_eq!(q.q0, 1.0 - d2 / 8.0 + d2 * d2 / 384.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.q1, r * v.x, epsilon = 1e-15);
        assert_abs_diff_eq!(q.q2, r * v.y, epsilon = 1e-15);
        // the exact half-angle form agrees
        let half = 0.5 * v.norm();
        assert_abs_diff_eq!(q.q1, v.x / v.norm() * half.sin(), epsilon = 1e-15);
    }

    #[test]
    fn rotvec_round_trip() {
        let v = RotationVector::new(0.3, -1.1, 2.0);
        let back = rotvec_to_quat(&v).to_rotation_vector();
        assert_abs_diff_eq!(back.0, v.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_unit_is_unchanged() {
        let q = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        assert_eq!(quat_normalize(&q).unwrap(), q);
    }

    #[test]
    fn normalize_small_excess() {
        let unit = Quaternion::new(0.3, -0.5, 0.1, 0.0).normalized();
        let q = unit.scale(1.001f64.sqrt());
        assert_abs_diff_eq!(q.norm_squared(), 1.001, epsilon = 1e-12);
        let n = quat_normalize(&q).unwrap();
        assert!((1.0 - n.norm_squared()).abs() < 1e-6);
        // direction identical to the exact normalization
        assert!(n.normalized().angle_to(&unit) < 1e-12);
    }

    #[test]
    fn normalize_rejects_divergent_norm() {
        let q = Quaternion::IDENTITY.scale(1.2f64.sqrt());
        assert!(matches!(quat_normalize(&q), Err(GeomError::NormOutOfRange(_))));
    }

    #[test]
    fn fast_atan_fixed_points() {
        assert_eq!(fast_atan2(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(fast_atan2(1.0, 0.0).unwrap(), FRAC_PI_2);
        assert_eq!(fast_atan2(-1.0, 0.0).unwrap(), -FRAC_PI_2);
        let q = fast_atan2(1.0, 1.0).unwrap();
        assert!((q - std::f64::consts::FRAC_PI_4).abs() <= FAST_ATAN2_MAX_ERROR);
        assert!((fast_atan2(-1.0, 1.0).unwrap() + std::f64::consts::FRAC_PI_4).abs() <= FAST_ATAN2_MAX_ERROR);
        assert_eq!(fast_atan2(0.0, 0.0), Err(GeomError::AtanDomain));
    }

    #[test]
    fn cne_at_origin() {
        let c = cne(0.0, 0.0);
        let expected = Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
        assert!(max_abs(&c.0, &expected) < 1e-15);
    }

    #[test]
    fn cne_is_orthonormal_near_pole() {
        let c = cne(FRAC_PI_2 - 1e-9, 2.0);
        assert!(c.is_orthonormal(1e-12));
        assert!(c.0.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn wrap_pi_range() {
        assert_abs_diff_eq!(wrap_pi(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_pi(3.0 * PI / 2.0), -FRAC_PI_2, epsilon = 1e-15);
    }
}

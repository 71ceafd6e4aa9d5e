//! Minimal rotation algebra.
//!
//! Frames are x forward, y left, z up. A rotation matrix `R` maps body-frame
//! vectors into the inertial frame and is composed as `Rz(yaw)·Ry(pitch)·Rx(roll)`.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance used by [`vee`] to accept a matrix as antisymmetric.
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    from = "[S; 3]",
    into = "[S; 3]",
    bound(
        deserialize = "S: Copy + Deserialize<'de>",
        serialize = "S: Copy + Serialize"
    )
)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Vec3<S> {
    pub const fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn from_array(a: [S; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> S {
        self.dot(self).sqrt()
    }

    /// Component-wise product, used for diagonal gain matrices.
    pub fn hadamard(self, o: Self) -> Self {
        Self::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map(self, f: impl Fn(S) -> S) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }
}

impl<S: Real> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Real> AddAssign for Vec3<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Real> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Real> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Real> Mul<S> for Vec3<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<S: Copy> From<[S; 3]> for Vec3<S> {
    fn from(a: [S; 3]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
        }
    }
}

impl<S: Copy> From<Vec3<S>> for [S; 3] {
    fn from(v: Vec3<S>) -> Self {
        [v.x, v.y, v.z]
    }
}

/// 3×3 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Real> Mat3<S> {
    pub const fn from_rows(m: [[S; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::from_rows([[S::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag(Vec3::new(S::one(), S::one(), S::one()))
    }

    pub fn diag(d: Vec3<S>) -> Self {
        let z = S::zero();
        Self::from_rows([[d.x, z, z], [z, d.y, z], [z, z, d.z]])
    }

    pub fn row(&self, i: usize) -> Vec3<S> {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3<S> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn det(&self) -> S {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    pub fn scale(&self, k: S) -> Self {
        let mut r = *self;
        r.m.iter_mut().flatten().for_each(|v| *v = *v * k);
        r
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> S {
        self.m
            .iter()
            .flatten()
            .fold(S::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    /// Inverse of a diagonal matrix; off-diagonal entries are ignored.
    pub fn diag_inverse(&self) -> Self {
        Self::diag(Vec3::new(
            S::one() / self.m[0][0],
            S::one() / self.m[1][1],
            S::one() / self.m[2][2],
        ))
    }

    /// Re-orthonormalizes a near-rotation by Gram–Schmidt on its rows.
    pub fn orthonormalized(&self) -> Self {
        let r0 = self.row(0);
        let e0 = r0 * (S::one() / r0.norm());
        let r1 = self.row(1);
        let r1 = r1 - e0 * e0.dot(r1);
        let e1 = r1 * (S::one() / r1.norm());
        let e2 = e0.cross(e1);
        Self::from_rows([e0.to_array(), e1.to_array(), e2.to_array()])
    }
}

impl<S: Real> Add for Mat3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[i][j] + o.m[i][j];
            }
        }
        r
    }
}

impl<S: Real> Sub for Mat3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-S::one())
    }
}

impl<S: Real> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] =
                    self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        r
    }
}

impl<S: Real> Mul<Vec3<S>> for Mat3<S> {
    type Output = Vec3<S>;
    fn mul(self, v: Vec3<S>) -> Vec3<S> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// Roll, pitch, yaw in radians, composed as `Rz(yaw)·Ry(pitch)·Rx(roll)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles<S> {
    pub roll: S,
    pub pitch: S,
    pub yaw: S,
}

impl<S: Real> EulerAngles<S> {
    pub fn new(roll: S, pitch: S, yaw: S) -> Self {
        Self { roll, pitch, yaw }
    }

    /// Checks finiteness and the angle ranges. Pitch may exceed ±π/2 by
    /// `margin` to admit the flat poses reached on the ground.
    pub fn is_valid(&self, margin: S) -> bool {
        let pi = S::PI();
        let in_half_open = |a: S| a > -pi && a <= pi;
        let half = S::FRAC_PI_2() + margin;
        self.roll.is_finite()
            && self.pitch.is_finite()
            && self.yaw.is_finite()
            && in_half_open(self.roll)
            && in_half_open(self.yaw)
            && self.pitch.abs() <= half
            && self.pitch.abs() <= half
    }
}

/// Cross-product matrix: `skew(v)·w == v × w`.
pub fn skew<S: Real>(v: Vec3<S>) -> Mat3<S> {
    let z = S::zero();
    Mat3::from_rows([[z, -v.z, v.y], [v.z, z, -v.x], [-v.y, v.x, z]])
}

/// Inverse of [`skew`]. Rejects matrices whose symmetric part exceeds
/// [`ANTISYMMETRY_TOL`].
pub fn vee<S: Real>(m: &Mat3<S>) -> Result<Vec3<S>> {
    let residual = (*m + m.transpose()).max_abs();
    if !(residual <= S::lit(ANTISYMMETRY_TOL)) {
        return Err(Error::NotAntisymmetric {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(Vec3::new(m.m[2][1], m.m[0][2], m.m[1][0]))
}

pub fn rot_x<S: Real>(a: S) -> Mat3<S> {
    let (s, c) = a.sin_cos();
    let (o, z) = (S::one(), S::zero());
    Mat3::from_rows([[o, z, z], [z, c, -s], [z, s, c]])
}

pub fn rot_y<S: Real>(a: S) -> Mat3<S> {
    let (s, c) = a.sin_cos();
    let (o, z) = (S::one(), S::zero());
    Mat3::from_rows([[c, z, s], [z, o, z], [-s, z, c]])
}

pub fn rot_z<S: Real>(a: S) -> Mat3<S> {
    let (s, c) = a.sin_cos();
    let (o, z) = (S::one(), S::zero());
    Mat3::from_rows([[c, -s, z], [s, c, z], [z, z, o]])
}

pub fn euler_to_rotation<S: Real>(e: EulerAngles<S>) -> Mat3<S> {
    rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll)
}

/// Recovers Z-Y-X Euler angles. Pitch lands in `[-π/2, π/2]`.
pub fn rotation_to_euler<S: Real>(r: &Mat3<S>) -> EulerAngles<S> {
    let sp = -r.m[2][0];
    let pitch = if sp >= S::one() {
        S::FRAC_PI_2()
    } else if sp <= -S::one() {
        -S::FRAC_PI_2()
    } else {
        sp.asin()
    };
    let roll = r.m[2][1].atan2(r.m[2][2]);
    let yaw = r.m[1][0].atan2(r.m[0][0]);
    EulerAngles::new(roll, pitch, yaw)
}

/// `½·vee(R_dᵀR − RᵀR_d)`: the attitude error of `r` relative to `r_d`.
pub fn attitude_error<S: Real>(r_d: &Mat3<S>, r: &Mat3<S>) -> Vec3<S> {
    let e = r_d.transpose() * *r - r.transpose() * *r_d;
    // e is antisymmetric by construction; read it off directly so rounding
    // in the products never trips the tolerance check in `vee`.
    let half = S::lit(0.5);
    Vec3::new(
        half * (e.m[2][1] - e.m[1][2]) * half,
        half * (e.m[0][2] - e.m[2][0]) * half,
        half * (e.m[1][0] - e.m[0][1]) * half,
    )
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<S: Real>(a: S) -> S {
    let two_pi = S::PI() + S::PI();
    let mut w = a % two_pi;
    if w <= -S::PI() {
        w = w + two_pi;
    } else if w > S::PI() {
        w = w - two_pi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn skew_zero_is_zero_matrix() {
        assert_eq!(skew(v(0.0, 0.0, 0.0)), Mat3::zero());
    }

    #[test]
    fn skew_matches_cross_product() {
        assert_eq!(
            skew(v(1.0, 2.0, 3.0)) * v(4.0, 5.0, 6.0),
            v(-3.0, 6.0, -3.0)
        );
    }

    #[test]
    fn skew_is_antisymmetric() {
        let s = skew(v(0.3, -1.2, 0.7));
        assert_eq!(s.transpose(), s.scale(-1.0));
    }

    #[test]
    fn vee_inverts_skew() {
        assert_eq!(vee(&skew(v(1.0, 2.0, 3.0))).unwrap(), v(1.0, 2.0, 3.0));
        assert_eq!(vee(&Mat3::<f64>::zero()).unwrap(), Vec3::zero());
        assert_eq!(vee(&skew(v(-0.1, 0.5, 2.0))).unwrap(), v(-0.1, 0.5, 2.0));
    }

    #[test]
    fn vee_rejects_symmetric_part() {
        let mut m = skew(v(1.0, 2.0, 3.0));
        m.m[0][1] += 1e-6;
        assert!(matches!(vee(&m), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn euler_identity_and_quarter_pitch() {
        assert_eq!(
            euler_to_rotation(EulerAngles::new(0.0, 0.0, 0.0)),
            Mat3::identity()
        );
        let r = euler_to_rotation(EulerAngles::new(0.0, core::f64::consts::FRAC_PI_2, 0.0));
        let expected = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(r.m[i][j], expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn attitude_error_examples() {
        let r = euler_to_rotation(EulerAngles::new(0.2, -0.4, 1.1));
        assert_eq!(attitude_error(&r, &r), Vec3::zero());

        let eps = 0.3_f64;
        let e = attitude_error(&Mat3::identity(), &rot_z(eps));
        assert_abs_diff_eq!(e.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.z, eps.sin(), epsilon = 1e-15);

        let e = attitude_error(&Mat3::identity(), &rot_x(0.1));
        assert_abs_diff_eq!(e.x, 0.1_f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn euler_roundtrip_inside_gimbal_range() {
        let e = EulerAngles::new(0.4, -1.2, -2.9);
        let back = rotation_to_euler(&euler_to_rotation(e));
        assert_abs_diff_eq!(back.roll, e.roll, epsilon = 1e-12);
        assert_abs_diff_eq!(back.pitch, e.pitch, epsilon = 1e-12);
        assert_abs_diff_eq!(back.yaw, e.yaw, epsilon = 1e-12);
    }

    #[test]
    fn orthonormalize_repairs_drift() {
        let mut r = euler_to_rotation(EulerAngles::new(0.3_f64, 0.2, -0.5));
        r.m[0][1] += 1e-4;
        r.m[2][2] -= 3e-5;
        let q = r.orthonormalized();
        assert!((q.transpose() * q - Mat3::identity()).max_abs() < 1e-14);
        assert!((q.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(
            wrap_angle(3.0 * core::f64::consts::PI),
            core::f64::consts::PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(wrap_angle(-0.5_f64), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn f32_rotation_is_orthonormal() {
        let r = euler_to_rotation(EulerAngles::new(0.3_f32, -0.7, 2.0));
        assert!((r.transpose() * r - Mat3::identity()).max_abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn vee_skew_identity(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
            prop_assert_eq!(vee(&skew(v(x, y, z))).unwrap(), v(x, y, z));
        }

        #[test]
        fn skew_vee_identity(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
            let m = skew(v(x, y, z));
            prop_assert_eq!(skew(vee(&m).unwrap()), m);
        }

        #[test]
        fn rotation_is_orthonormal(
            roll in -PI..PI, pitch in -1.7..1.7f64, yaw in -PI..PI,
        ) {
            let r = euler_to_rotation(EulerAngles::new(roll, pitch, yaw));
            prop_assert!((r.transpose() * r - Mat3::identity()).max_abs() < 1e-12);
            prop_assert!((r.det() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn attitude_error_is_antisymmetric(
            a in prop::array::uniform3(-3.0..3.0f64), b in prop::array::uniform3(-1.5..1.5f64),
        ) {
            let ra = euler_to_rotation(EulerAngles::new(a[0], a[1] / 2.0, a[2]));
            let rb = euler_to_rotation(EulerAngles::new(b[0], b[1], b[2]));
            let ab = attitude_error(&ra, &rb);
            let ba = attitude_error(&rb, &ra);
            prop_assert!((ab + ba).norm() < 1e-14);
        }
    }
}

//! Vector, matrix and quaternion algebra.
//!
//! Quaternions are stored as `[vector; scalar]` and multiplied with the
//! `p ⊗ q = [p_w q_v + q_w p_v − p_v × q_v ; p_w q_w − p_v · q_v]` product.
//! Under this product attitudes compose as `q_{C/A} = q_{C/B} ⊗ q_{B/A}` and
//! kinematics read `q̇_{B/A} = ½ [ω; 0] ⊗ q_{B/A}` with `ω` in body axes.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

/// Error raised by the algebra layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathError {
    /// A component was NaN or infinite.
    NonFinite,
    /// A quaternion or axis had (numerically) zero norm.
    ZeroNorm,
    /// A matrix that must be inverted is singular.
    Singular,
}

impl fmt::Display for MathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MathError::NonFinite => f.write_str("invalid argument: non-finite component"),
            MathError::ZeroNorm => f.write_str("invalid argument: zero-norm quaternion or axis"),
            MathError::Singular => f.write_str("invalid argument: singular matrix"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub const fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    /// Unit vector in the same direction, or `None` for a zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, k: f64) -> Vec3 {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self {
            m: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    pub const fn diagonal(a: f64, b: f64, c: f64) -> Self {
        Self {
            m: [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]],
        }
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.m[i])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3::from_rows(r)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Result<Mat3, MathError> {
        let det = self.determinant();
        if !det.is_finite() {
            return Err(MathError::NonFinite);
        }
        if det == 0.0 {
            return Err(MathError::Singular);
        }
        let m = &self.m;
        let cof = |a: usize, b: usize, c: usize, d: usize| m[a][b] * m[c][d] - m[a][d] * m[c][b];
        let adj = [
            [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
            [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
            [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
        ];
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = adj[i][j] / det;
            }
        }
        Ok(Mat3::from_rows(r))
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.m[i][j] - o.m[i][j]).abs());
            }
        }
        d
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.transpose()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    /// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi sweeps.
    pub fn symmetric_eigenvalues(&self) -> [f64; 3] {
        let mut a = self.m;
        for _ in 0..64 {
            let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
            let scale = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
            if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                #[allow(clippy::needless_range_loop)]
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                #[allow(clippy::needless_range_loop)]
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2]];
        ev.sort_unstable_by(f64::total_cmp);
        ev
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(v)
    }
}

impl Mul<Vec3> for &Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.mul_vec(v)
    }
}

/// Orthonormal frame rotation `T_{B/A}`: maps A-frame components to B-frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Apply to a vector: `v^B = T_{B/A} v^A`.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0.mul_vec(v)
    }

    /// `T_{A/B}`, mapping B-frame components back to A.
    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        self.0.transpose().mul_vec(v)
    }

    pub fn compose(&self, o: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0.mul_mat(&o.0))
    }

    /// Accept an orthonormal matrix. Returns `None` if `MᵀM` deviates from I by more than `tol`
    /// or the determinant is not +1.
    pub fn from_orthonormal(m: Mat3, tol: f64) -> Option<RotationMatrix> {
        let mtm = m.transpose().mul_mat(&m);
        if mtm.max_abs_diff(&Mat3::IDENTITY) <= tol && (m.determinant() - 1.0).abs() <= tol {
            Some(RotationMatrix(m))
        } else {
            None
        }
    }

    /// Quaternion `q_{B/A}` with `q.to_rotation() == self` (Shepperd's method).
    pub fn to_quaternion(&self) -> Quaternion {
        // T = (w² − v·v) I + 2 v vᵀ − 2 w [v×]
        let m = &self.0.m;
        let tr = m[0][0] + m[1][1] + m[2][2];
        let (v, w) = if tr > m[0][0].max(m[1][1]).max(m[2][2]) {
            let w = 0.5 * libm::sqrt(1.0 + tr);
            let k = 0.25 / w;
            (Vec3::new((m[1][2] - m[2][1]) * k, (m[2][0] - m[0][2]) * k, (m[0][1] - m[1][0]) * k), w)
        } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
            let x = 0.5 * libm::sqrt(1.0 + 2.0 * m[0][0] - tr);
            let k = 0.25 / x;
            (Vec3::new(x, (m[0][1] + m[1][0]) * k, (m[0][2] + m[2][0]) * k), (m[1][2] - m[2][1]) * k)
        } else if m[1][1] >= m[2][2] {
            let y = 0.5 * libm::sqrt(1.0 + 2.0 * m[1][1] - tr);
            let k = 0.25 / y;
            (Vec3::new((m[0][1] + m[1][0]) * k, y, (m[1][2] + m[2][1]) * k), (m[2][0] - m[0][2]) * k)
        } else {
            let z = 0.5 * libm::sqrt(1.0 + 2.0 * m[2][2] - tr);
            let k = 0.25 / z;
            (Vec3::new((m[0][2] + m[2][0]) * k, (m[1][2] + m[2][1]) * k, z), (m[0][1] - m[1][0]) * k)
        };
        let q = Quaternion::normalize_raw(v, w).unwrap_or(Quaternion::IDENTITY);
        if q.w < 0.0 {
            q.negated()
        } else {
            q
        }
    }

    /// 3-2-1 (yaw, pitch, roll) angles of the frame rotation, radians.
    pub fn euler321(&self) -> (f64, f64, f64) {
        let m = &self.0.m;
        let yaw = libm::atan2(m[0][1], m[0][0]);
        let pitch = -libm::asin(m[0][2].clamp(-1.0, 1.0));
        let roll = libm::atan2(m[1][2], m[2][2]);
        (yaw, pitch, roll)
    }
}

/// Unconstrained 4-component quaternion-shaped value; used for derivatives and
/// intermediate integrator stages.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quat4 {
    pub v: Vec3,
    pub w: f64,
}

impl Quat4 {
    pub const ZERO: Quat4 = Quat4 { v: Vec3::ZERO, w: 0.0 };

    pub fn dot(self, o: Quat4) -> f64 {
        self.v.dot(o.v) + self.w * o.w
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn scaled(self, k: f64) -> Quat4 {
        Quat4 { v: self.v * k, w: self.w * k }
    }

    pub fn is_finite(self) -> bool {
        self.v.is_finite() && self.w.is_finite()
    }

    /// Product with the same operator convention as [`Quaternion`], without renormalization.
    pub fn product(p: Quat4, q: Quat4) -> Quat4 {
        Quat4 {
            v: q.v * p.w + p.v * q.w - p.v.cross(q.v),
            w: p.w * q.w - p.v.dot(q.v),
        }
    }
}

impl core::ops::Add for Quat4 {
    type Output = Quat4;
    fn add(self, o: Quat4) -> Quat4 {
        Quat4 { v: self.v + o.v, w: self.w + o.w }
    }
}

/// Unit quaternion `[v; w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    v: Vec3,
    w: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { v: Vec3::ZERO, w: 1.0 };

    /// Build from components, normalizing. Fails on non-finite or zero-norm input.
    pub fn new(v: Vec3, w: f64) -> Result<Self, MathError> {
        Self::normalize_raw(v, w)
    }

    fn normalize_raw(v: Vec3, w: f64) -> Result<Self, MathError> {
        if !(v.is_finite() && w.is_finite()) {
            return Err(MathError::NonFinite);
        }
        let n = libm::sqrt(v.norm_squared() + w * w);
        if n < 1e-300 {
            return Err(MathError::ZeroNorm);
        }
        // Already unit to rounding: keep the bits so normalizing is idempotent.
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Quaternion { v, w });
        }
        Ok(Quaternion { v: v / n, w: w / n })
    }

    pub fn from_quat4(q: Quat4) -> Result<Self, MathError> {
        Self::normalize_raw(q.v, q.w)
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self, MathError> {
        if !angle.is_finite() {
            return Err(MathError::NonFinite);
        }
        let a = axis.normalized().ok_or(if axis.is_finite() {
            MathError::ZeroNorm
        } else {
            MathError::NonFinite
        })?;
        let (s, c) = (libm::sin(0.5 * angle), libm::cos(0.5 * angle));
        Self::normalize_raw(a * s, c)
    }

    #[inline]
    pub fn vector(&self) -> Vec3 {
        self.v
    }

    #[inline]
    pub fn scalar(&self) -> f64 {
        self.w
    }

    pub fn as_quat4(&self) -> Quat4 {
        Quat4 { v: self.v, w: self.w }
    }

    /// Components as `[x, y, z, w]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.v.x, self.v.y, self.v.z, self.w]
    }

    pub fn norm(&self) -> f64 {
        self.as_quat4().norm()
    }

    /// `-q`: same attitude, opposite hemisphere.
    pub fn negated(&self) -> Quaternion {
        Quaternion { v: -self.v, w: -self.w }
    }

    /// `q⁻¹ = [−v; w]`.
    pub fn inverse(&self) -> Quaternion {
        Quaternion { v: -self.v, w: self.w }
    }

    /// Frame rotation matrix. For `q = q_{B/A}` this is `T_{B/A}`.
    pub fn to_rotation(&self) -> RotationMatrix {
        let (v, w) = (self.v, self.w);
        let d = w * w - v.norm_squared();
        let m = [
            [
                d + 2.0 * v.x * v.x,
                2.0 * (v.x * v.y + w * v.z),
                2.0 * (v.x * v.z - w * v.y),
            ],
            [
                2.0 * (v.y * v.x - w * v.z),
                d + 2.0 * v.y * v.y,
                2.0 * (v.y * v.z + w * v.x),
            ],
            [
                2.0 * (v.z * v.x + w * v.y),
                2.0 * (v.z * v.y - w * v.x),
                d + 2.0 * v.z * v.z,
            ],
        ];
        RotationMatrix(Mat3::from_rows(m))
    }

    /// Kinematic rate `q̇ = ½ [w ω − ω × v ; −ω · v]` for body rate `ω`.
    pub fn kinematics_rate(&self, omega: Vec3) -> Quat4 {
        kinematics_rate(self.as_quat4(), omega)
    }

    /// Rotation angle to `o` in radians, in `[0, π]`, insensitive to sign.
    pub fn angle_to(&self, o: &Quaternion) -> f64 {
        // atan2 keeps full precision for small angles, where acos of the dot product does not.
        let b = o.as_quat4();
        let r = Quat4::product(self.as_quat4(), Quat4 { v: -b.v, w: b.w });
        2.0 * libm::atan2(r.v.norm(), r.w.abs())
    }
}

/// Kinematic rate for a possibly unnormalized attitude quaternion (integrator stages).
pub fn kinematics_rate(q: Quat4, omega: Vec3) -> Quat4 {
    Quat4 {
        v: (omega * q.w - omega.cross(q.v)) * 0.5,
        w: -0.5 * omega.dot(q.v),
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    /// `p ⊗ q`, renormalized.
    fn mul(self, q: Quaternion) -> Quaternion {
        let r = Quat4::product(self.as_quat4(), q.as_quat4());
        // Inputs are unit and finite, so the product cannot be zero or non-finite.
        Quaternion::from_quat4(r).unwrap_or(Quaternion::IDENTITY)
    }
}

impl Default for Quaternion {
    fn default() -> Self {
        Quaternion::IDENTITY
    }
}

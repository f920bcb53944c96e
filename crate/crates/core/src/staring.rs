//! Ground-target staring desired frame for a circular orbit over a spherical,
//! non-rotating Earth.
//!
//! The orbit lies in the inertial x–y plane and passes over `(R, 0, 0)` at the
//! time of closest approach. The target sits cross-track so that the off-nadir
//! look angle at closest approach equals `look_angle`. The body z axis points
//! at the target and the x axis is the velocity direction projected
//! perpendicular to the line of sight.

use crate::desired::{DesiredError, DesiredFrame, DesiredSample};
use crate::math::{Mat3, RotationMatrix, Vec3};

pub const EARTH_RADIUS: f64 = 6_378_137.0;
pub const EARTH_MU: f64 = 3.986_004_418e14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaringGeometry {
    /// Orbit altitude [m].
    pub altitude: f64,
    /// Off-nadir angle to the target at closest approach [rad].
    pub look_angle: f64,
    /// Time of closest approach [s].
    pub t_closest: f64,
    pub earth_radius: f64,
    pub mu: f64,
}

impl Default for StaringGeometry {
    fn default() -> Self {
        StaringGeometry {
            altitude: 500e3,
            look_angle: 25f64.to_radians(),
            t_closest: 120.0,
            earth_radius: EARTH_RADIUS,
            mu: EARTH_MU,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStaring {
    pub geometry: StaringGeometry,
    radius: f64,
    mean_motion: f64,
    target: Vec3,
    /// Step of the attitude-rate stencil [s].
    rate_step: f64,
    /// Step of the acceleration stencil [s].
    accel_step: f64,
}

fn five_point<F: Fn(f64) -> Vec3>(f: F, t: f64, h: f64) -> Vec3 {
    (f(t - 2.0 * h) - f(t - h) * 8.0 + f(t + h) * 8.0 - f(t + 2.0 * h)) / (12.0 * h)
}

fn five_point_mat<F: Fn(f64) -> Mat3>(f: F, t: f64, h: f64) -> Mat3 {
    let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = (a.m[i][j] - 8.0 * b.m[i][j] + 8.0 * c.m[i][j] - d.m[i][j]) / (12.0 * h);
        }
    }
    Mat3::from_rows(m)
}

impl TargetStaring {
    pub fn new(geometry: StaringGeometry) -> Result<Self, DesiredError> {
        let g = geometry;
        if !(g.altitude > 0.0 && g.earth_radius > 0.0 && g.mu > 0.0) {
            return Err(DesiredError::Definition("altitude, earth radius and mu must be > 0"));
        }
        if !(g.look_angle >= 0.0) {
            return Err(DesiredError::Definition("look angle must be >= 0"));
        }
        let radius = g.earth_radius + g.altitude;
        let s = radius / g.earth_radius * libm::sin(g.look_angle);
        if !(s < 1.0) {
            return Err(DesiredError::BelowHorizon { t: g.t_closest });
        }
        let central = libm::asin(s) - g.look_angle;
        let target = Vec3::new(libm::cos(central), 0.0, libm::sin(central)) * g.earth_radius;
        Ok(TargetStaring {
            geometry: g,
            radius,
            mean_motion: libm::sqrt(g.mu / (radius * radius * radius)),
            target,
            rate_step: 0.05,
            accel_step: 0.1,
        })
    }

    pub fn target(&self) -> Vec3 {
        self.target
    }

    fn phase(&self, t: f64) -> f64 {
        self.mean_motion * (t - self.geometry.t_closest)
    }

    /// Inertial position and unit velocity direction.
    pub fn orbit(&self, t: f64) -> (Vec3, Vec3) {
        let (s, c) = (libm::sin(self.phase(t)), libm::cos(self.phase(t)));
        (Vec3::new(c, s, 0.0) * self.radius, Vec3::new(-s, c, 0.0))
    }

    pub fn visible(&self, t: f64) -> bool {
        let (r, _) = self.orbit(t);
        (r - self.target).dot(self.target) > 0.0
    }

    /// `T_{D/I}` (rows are the desired axes in inertial components).
    pub fn dcm(&self, t: f64) -> Mat3 {
        let (r, v) = self.orbit(t);
        let z = (self.target - r).normalized().unwrap_or(-r / self.radius);
        let x = (v - z * v.dot(z)).normalized().unwrap_or(Vec3::X);
        let y = z.cross(x);
        Mat3::from_rows([x.to_array(), y.to_array(), z.to_array()])
    }

    /// Desired rate in D components from `[ω×] = −Ṫ Tᵀ`.
    pub fn omega(&self, t: f64) -> Vec3 {
        let t_m = self.dcm(t);
        let t_dot = five_point_mat(|s| self.dcm(s), t, self.rate_step);
        let w = t_dot.mul_mat(&t_m.transpose());
        Vec3::new(
            0.5 * (w.m[1][2] - w.m[2][1]),
            0.5 * (w.m[2][0] - w.m[0][2]),
            0.5 * (w.m[0][1] - w.m[1][0]),
        )
    }

    pub fn omega_dot(&self, t: f64) -> Vec3 {
        five_point(|s| self.omega(s), t, self.accel_step)
    }
}

impl DesiredFrame for TargetStaring {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError> {
        if !self.visible(t) {
            return Err(DesiredError::BelowHorizon { t });
        }
        let rot = RotationMatrix::from_orthonormal(self.dcm(t), 1e-9)
            .ok_or(DesiredError::Definition("degenerate line of sight"))?;
        Ok(DesiredSample {
            t,
            q_d: rot.to_quaternion(),
            omega_d: self.omega(t),
            omega_d_dot: self.omega_dot(t),
        })
    }

    /// Local-vertical local-horizontal frame: z nadir, y opposite the orbit normal.
    fn reference_frame(&self, t: f64) -> Option<RotationMatrix> {
        let (r, _) = self.orbit(t);
        let z = -r / self.radius;
        let y = -Vec3::Z;
        let x = y.cross(z);
        RotationMatrix::from_orthonormal(Mat3::from_rows([x.to_array(), y.to_array(), z.to_array()]), 1e-9)
    }
}

//! Slew-rate-limited cap on the regulating rate.

use super::ProfileError;
use crate::math::Vec3;

fn discriminant(omega_d: Vec3, axis: Vec3, omega_max: f64) -> f64 {
    let de = omega_d.dot(axis);
    de * de + omega_max * omega_max - omega_d.norm_squared()
}

/// Largest `ω_R` with `‖ω_D + ω_R ê‖ = ω_max`.
pub fn omega_r_max(omega_d: Vec3, axis: Vec3, omega_max: f64) -> Result<f64, ProfileError> {
    let wd = omega_d.norm();
    if !(wd < omega_max) {
        return Err(ProfileError::Infeasible {
            omega_d: wd,
            omega_max,
        });
    }
    Ok(-omega_d.dot(axis) + libm::sqrt(discriminant(omega_d, axis, omega_max)))
}

/// Time derivative of [`omega_r_max`]. The flag is set when the square root
/// vanished and the result was clamped to zero.
pub fn omega_r_max_dot(
    omega_d: Vec3,
    omega_d_dot: Vec3,
    axis: Vec3,
    axis_rate: Vec3,
    omega_max: f64,
) -> (f64, bool) {
    let root = libm::sqrt(discriminant(omega_d, axis, omega_max).max(0.0));
    let de_dot = omega_d_dot.dot(axis) + omega_d.dot(axis_rate);
    if root <= 1e-300 {
        return (0.0, true);
    }
    let v = -de_dot + (omega_d.dot(axis) * de_dot - omega_d_dot.dot(omega_d)) / root;
    (v, false)
}

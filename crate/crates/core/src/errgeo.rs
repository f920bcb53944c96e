//! Error quaternion between the desired and body frames, the instantaneous
//! eigen-axis and error angle, and their time derivatives.

use crate::math::{Quaternion, Vec3};

/// `‖q_e‖` below which the eigen-axis is treated as undefined.
pub const DEFAULT_AXIS_GUARD: f64 = 1e-8;

/// Full relative state between body frame `B` and desired frame `D`, in body axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorState {
    /// `q_{D/B}`, canonicalized to a non-negative scalar part.
    pub q_e: Quaternion,
    /// `ω_D − ω_B` in body axes [rad/s].
    pub omega_e: Vec3,
    /// Unit eigen-axis, zero when `singular`.
    pub axis: Vec3,
    /// Error angle in `[0, π]` [rad].
    pub theta_e: f64,
    /// Eigen-axis rate in body axes [1/s].
    pub axis_rate: Vec3,
    /// Error angle rate [rad/s].
    pub theta_e_rate: f64,
    pub singular: bool,
}

/// Error quaternion `q_D ⊗ q_B⁻¹` (canonical, `w ≥ 0`) and error rate
/// `T_{B/D} ω_D^D − ω_B^B`.
pub fn error_quaternion(
    q_d: &Quaternion,
    q_b: &Quaternion,
    omega_d_in_d: Vec3,
    omega_b: Vec3,
) -> (Quaternion, Vec3) {
    let mut q_e = *q_d * q_b.inverse();
    if q_e.scalar() < 0.0 {
        q_e = q_e.negated();
    }
    // T_{D/B} = R(q_e); its transpose resolves D components in B.
    let omega_d_in_b = q_e.to_rotation().apply_inverse(omega_d_in_d);
    (q_e, omega_d_in_b - omega_b)
}

/// Eigen-axis and angle of a canonical error quaternion. Returns `(axis, theta, singular)`.
pub fn eigen_axis_angle(q_e: &Quaternion, guard: f64) -> (Vec3, f64, bool) {
    let theta = 2.0 * libm::acos(q_e.scalar().clamp(-1.0, 1.0));
    let v = q_e.vector();
    let n = v.norm();
    if n >= guard && n > 0.0 {
        (v / n, theta, false)
    } else {
        (Vec3::ZERO, theta, true)
    }
}

/// `θ̇_e = ω_e · ê`; zero for a singular axis.
pub fn error_angle_rate(omega_e: Vec3, axis: Vec3) -> f64 {
    omega_e.dot(axis)
}

/// `ê̇ = ½ ( (q_e/‖q_e‖) ω_{e⊥} + ω_{e⊥} × ê )` with `ω_{e⊥} = ω_e − (ê·ω_e) ê`.
///
/// Zero when the vector part of `q_e` is below `guard`.
pub fn eigen_axis_rate(omega_e: Vec3, axis: Vec3, q_e: &Quaternion, guard: f64) -> Vec3 {
    let n = q_e.vector().norm();
    if n < guard || n == 0.0 || axis == Vec3::ZERO {
        return Vec3::ZERO;
    }
    let perp = omega_e - axis * axis.dot(omega_e);
    (perp * (q_e.scalar() / n) + perp.cross(axis)) * 0.5
}

/// Assemble the complete [`ErrorState`].
pub fn error_state(
    q_d: &Quaternion,
    q_b: &Quaternion,
    omega_d_in_d: Vec3,
    omega_b: Vec3,
    guard: f64,
) -> ErrorState {
    let (q_e, omega_e) = error_quaternion(q_d, q_b, omega_d_in_d, omega_b);
    let (axis, theta_e, singular) = eigen_axis_angle(&q_e, guard);
    let (theta_e_rate, axis_rate) = if singular {
        (0.0, Vec3::ZERO)
    } else {
        (
            error_angle_rate(omega_e, axis),
            eigen_axis_rate(omega_e, axis, &q_e, guard),
        )
    };
    ErrorState {
        q_e,
        omega_e,
        axis,
        theta_e,
        axis_rate,
        theta_e_rate,
        singular,
    }
}

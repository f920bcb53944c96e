//! Rigid-body attitude dynamics, the sinusoidal disturbance and an RK4 propagator.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_6};
use core::fmt;

use crate::math::{kinematics_rate, Mat3, Quat4, Quaternion, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantError {
    NotSymmetric,
    NotPositiveDefinite,
    NonPositive(&'static str),
}

impl fmt::Display for PlantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlantError::NotSymmetric => f.write_str("invalid argument: inertia must be symmetric"),
            PlantError::NotPositiveDefinite => {
                f.write_str("invalid argument: inertia must be positive definite")
            }
            PlantError::NonPositive(name) => write!(f, "invalid argument: {name} must be > 0"),
        }
    }
}

/// Inertia and actuator/rate limits. Derived inertia quantities are cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteParams {
    inertia: Mat3,
    inertia_inv: Mat3,
    eigenvalues: [f64; 3],
    omega_max: f64,
    u_max: f64,
    d_max: f64,
}

impl SatelliteParams {
    pub fn new(inertia: Mat3, omega_max: f64, u_max: f64, d_max: f64) -> Result<Self, PlantError> {
        if !inertia.is_finite() {
            return Err(PlantError::NotPositiveDefinite);
        }
        let scale = inertia.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if !inertia.is_symmetric(1e-9 * scale.max(1.0)) {
            return Err(PlantError::NotSymmetric);
        }
        let eigenvalues = inertia.symmetric_eigenvalues();
        if !(eigenvalues[0] > 0.0) {
            return Err(PlantError::NotPositiveDefinite);
        }
        for (name, v) in [("omega_max", omega_max), ("u_max", u_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlantError::NonPositive(name));
            }
        }
        if !(d_max >= 0.0 && d_max.is_finite()) {
            return Err(PlantError::NonPositive("d_max"));
        }
        let inertia_inv = inertia
            .inverse()
            .map_err(|_| PlantError::NotPositiveDefinite)?;
        Ok(SatelliteParams {
            inertia,
            inertia_inv,
            eigenvalues,
            omega_max,
            u_max,
            d_max,
        })
    }

    /// Values of the reference spacecraft: 3°/s slew limit, 150 N·m torque, 2 N·m disturbance bound.
    pub fn reference() -> Self {
        SatelliteParams::new(
            Self::REFERENCE_INERTIA,
            3f64.to_radians(),
            150.0,
            2.0,
        )
        .expect("reference parameters are valid")
    }

    pub const REFERENCE_INERTIA: Mat3 = Mat3::from_rows([
        [21400.0, 2100.0, 1800.0],
        [2100.0, 20100.0, 500.0],
        [1800.0, 500.0, 5000.0],
    ]);

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }
    pub fn inertia_inv(&self) -> &Mat3 {
        &self.inertia_inv
    }
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }
    /// Largest eigenvalue, equal to the largest singular value for SPD `J`.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[2]
    }
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }
    pub fn u_max(&self) -> f64 {
        self.u_max
    }
    pub fn d_max(&self) -> f64 {
        self.d_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    /// `q_{B/I}`.
    pub q: Quaternion,
    /// Body rate in body axes [rad/s].
    pub omega: Vec3,
    pub t: f64,
}

impl BodyState {
    pub fn at_rest(q: Quaternion) -> Self {
        BodyState {
            q,
            omega: Vec3::ZERO,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalDisturbance {
    pub amplitude: Vec3,
    pub frequency: Vec3,
    pub phase: Vec3,
}

impl SinusoidalDisturbance {
    /// Near-orbital-frequency torque used throughout the reference experiments.
    pub const REFERENCE: SinusoidalDisturbance = SinusoidalDisturbance {
        amplitude: Vec3::new(1.1, 0.9, 1.0),
        frequency: Vec3::new(0.0012, 0.0010, 0.0013),
        phase: Vec3::new(FRAC_PI_6, 0.0, FRAC_PI_2),
    };

    pub fn at(&self, t: f64) -> Vec3 {
        let c = |a: f64, w: f64, p: f64| a * libm::sin(w * t + p);
        Vec3::new(
            c(self.amplitude.x, self.frequency.x, self.phase.x),
            c(self.amplitude.y, self.frequency.y, self.phase.y),
            c(self.amplitude.z, self.frequency.z, self.phase.z),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disturbance {
    Off,
    Sinusoidal(SinusoidalDisturbance),
}

impl Disturbance {
    pub const REFERENCE: Disturbance = Disturbance::Sinusoidal(SinusoidalDisturbance::REFERENCE);

    pub fn at(&self, t: f64) -> Vec3 {
        match self {
            Disturbance::Off => Vec3::ZERO,
            Disturbance::Sinusoidal(s) => s.at(t),
        }
    }

    pub fn is_on(&self) -> bool {
        !matches!(self, Disturbance::Off)
    }
}

/// `(q̇, ω̇)` with `J ω̇ = u + d − ω × J ω`.
pub fn dynamics_rhs(q: Quat4, omega: Vec3, u: Vec3, d: Vec3, sat: &SatelliteParams) -> (Quat4, Vec3) {
    let j = sat.inertia();
    let h = j * omega;
    let omega_dot = sat.inertia_inv() * (u + d - omega.cross(h));
    (kinematics_rate(q, omega), omega_dot)
}

/// One classical RK4 step without renormalization, returning the raw quaternion.
pub fn rk4_step_raw(
    q: Quat4,
    omega: Vec3,
    t: f64,
    dt: f64,
    u: Vec3,
    sat: &SatelliteParams,
    dist: &Disturbance,
) -> (Quat4, Vec3) {
    let half = 0.5 * dt;
    let (k1q, k1w) = dynamics_rhs(q, omega, u, dist.at(t), sat);
    let (k2q, k2w) = dynamics_rhs(
        q + k1q.scaled(half),
        omega + k1w * half,
        u,
        dist.at(t + half),
        sat,
    );
    let (k3q, k3w) = dynamics_rhs(
        q + k2q.scaled(half),
        omega + k2w * half,
        u,
        dist.at(t + half),
        sat,
    );
    let (k4q, k4w) = dynamics_rhs(q + k3q.scaled(dt), omega + k3w * dt, u, dist.at(t + dt), sat);
    let s = dt / 6.0;
    let q_next = q + (k1q + k2q.scaled(2.0) + k3q.scaled(2.0) + k4q).scaled(s);
    let w_next = omega + (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * s;
    (q_next, w_next)
}

/// RK4 step with `u` held, followed by quaternion renormalization.
pub fn rk4_step(
    state: &BodyState,
    u: Vec3,
    dt: f64,
    sat: &SatelliteParams,
    dist: &Disturbance,
) -> BodyState {
    let (q, omega) = rk4_step_raw(state.q.as_quat4(), state.omega, state.t, dt, u, sat, dist);
    BodyState {
        q: Quaternion::from_quat4(q).unwrap_or(state.q),
        omega,
        t: state.t + dt,
    }
}

//! Desired-frame samples and sources.

use core::fmt;

use crate::math::{Quaternion, RotationMatrix, Vec3};

/// Desired attitude and its rates at one instant, rates in D-frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredSample {
    pub t: f64,
    /// `q_{D/I}`.
    pub q_d: Quaternion,
    pub omega_d: Vec3,
    pub omega_d_dot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesiredError {
    /// Requested time lies outside the source's span.
    OutOfRange { t: f64, start: f64, end: f64 },
    /// The target is not visible from the spacecraft.
    BelowHorizon { t: f64 },
    /// Bad construction parameters.
    Definition(&'static str),
}

impl fmt::Display for DesiredError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesiredError::OutOfRange { t, start, end } => write!(
                f,
                "scenario definition: t = {t} s outside desired-frame span [{start}, {end}] s"
            ),
            DesiredError::BelowHorizon { t } => {
                write!(f, "scenario definition: target below the horizon at t = {t} s")
            }
            DesiredError::Definition(m) => write!(f, "scenario definition: {m}"),
        }
    }
}

impl core::error::Error for DesiredError {}

/// Source of desired-frame samples.
pub trait DesiredFrame {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError>;

    /// `T_{O/I}` of the frame Euler angles are reported against; `None` means inertial.
    fn reference_frame(&self, _t: f64) -> Option<RotationMatrix> {
        None
    }
}

impl<T: DesiredFrame + ?Sized> DesiredFrame for &T {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError> {
        (**self).sample(t)
    }
    fn reference_frame(&self, t: f64) -> Option<RotationMatrix> {
        (**self).reference_frame(t)
    }
}

/// Inertially fixed desired attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedAttitude {
    pub q_d: Quaternion,
}

impl DesiredFrame for FixedAttitude {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError> {
        Ok(DesiredSample {
            t,
            q_d: self.q_d,
            omega_d: Vec3::ZERO,
            omega_d_dot: Vec3::ZERO,
        })
    }
}

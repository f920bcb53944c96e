//! Turning a [`RunConfig`] into a runnable scenario.

use slewctl_core::desired::{DesiredError, DesiredFrame, DesiredSample, FixedAttitude};
use slewctl_core::math::{Quaternion, RotationMatrix, Vec3};
use slewctl_core::plant::{BodyState, Disturbance};
use slewctl_core::scenario::{simulate, Observer, RunSummary, Scenario, ScenarioKind, SimError};
use slewctl_core::staring::TargetStaring;

use crate::config::{DesiredSpec, InitialAttitude, RunConfig};
use crate::desired_csv::{DesiredCsvError, DesiredTable};

/// Any desired-frame source a configuration can name.
#[derive(Debug, Clone)]
pub enum DesiredSource {
    Fixed(FixedAttitude),
    Staring(TargetStaring),
    Table(DesiredTable),
}

impl DesiredFrame for DesiredSource {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError> {
        match self {
            DesiredSource::Fixed(d) => d.sample(t),
            DesiredSource::Staring(d) => d.sample(t),
            DesiredSource::Table(d) => d.sample(t),
        }
    }

    fn reference_frame(&self, t: f64) -> Option<RotationMatrix> {
        match self {
            DesiredSource::Fixed(d) => d.reference_frame(t),
            DesiredSource::Staring(d) => d.reference_frame(t),
            DesiredSource::Table(d) => d.reference_frame(t),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    DesiredCsv(#[from] DesiredCsvError),
}

impl From<DesiredError> for RunError {
    fn from(e: DesiredError) -> Self {
        RunError::Sim(e.into())
    }
}

/// Build the scenario and desired source described by `cfg`.
pub fn build(cfg: &RunConfig) -> Result<(Scenario, DesiredSource), RunError> {
    let sc = &cfg.scenario;
    let (kind, desired) = match &sc.desired {
        DesiredSpec::RestToRest { axis, angle } => {
            let q_d = Quaternion::from_axis_angle(*axis, *angle)
                .map_err(|_| SimError::Definition("maneuver axis must be finite and non-zero"))?;
            (ScenarioKind::RestToRest, DesiredSource::Fixed(FixedAttitude { q_d }))
        }
        DesiredSpec::TargetStaring(g) => (ScenarioKind::TrackGenerator, DesiredSource::Staring(TargetStaring::new(*g)?)),
        DesiredSpec::Csv(path) => (ScenarioKind::TrackGenerator, DesiredSource::Table(DesiredTable::load(path)?)),
    };
    let t0 = sc.start_time;
    let (q, omega) = match sc.initial {
        InitialAttitude::Identity => (Quaternion::IDENTITY, Vec3::ZERO),
        InitialAttitude::Reference => (
            desired
                .reference_frame(t0)
                .map_or(Quaternion::IDENTITY, |r| r.to_quaternion()),
            Vec3::ZERO,
        ),
        InitialAttitude::Desired => {
            let d = desired.sample(t0)?;
            (d.q_d, d.omega_d)
        }
        InitialAttitude::Explicit(q) => (q, Vec3::ZERO),
    };
    let initial = BodyState {
        q,
        omega: sc.initial_omega.unwrap_or(omega),
        t: t0,
    };
    let mut control = cfg.control;
    control.d_max = cfg.satellite.d_max();
    let scenario = Scenario {
        kind,
        initial,
        satellite: cfg.satellite,
        control,
        disturbance: if sc.disturbance { Disturbance::REFERENCE } else { Disturbance::Off },
        control_frequency: sc.control_frequency,
        dt: sc.dt,
        duration: sc.duration,
        theta_tol: sc.theta_tol,
        omega_tol: sc.omega_tol,
    };
    scenario.validate()?;
    Ok((scenario, desired))
}

/// Build and simulate.
pub fn run<O: Observer + ?Sized>(cfg: &RunConfig, observer: &mut O) -> Result<RunSummary, RunError> {
    let (scenario, desired) = build(cfg)?;
    Ok(simulate(&scenario, &desired, observer)?)
}

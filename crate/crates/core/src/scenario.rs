//! Scenario definition, the closed-loop simulation driver and convergence detection.

use core::fmt;

use crate::controller::{compute_command, ControlError, ControlFlags, ControlOutput, ControlParams, CycleMemory};
use crate::desired::{DesiredError, DesiredFrame, DesiredSample, FixedAttitude};
use crate::math::{Quaternion, Vec3};
use crate::plant::{rk4_step, BodyState, Disturbance, SatelliteParams};
use crate::rateprofile::Segment;

/// Reference convergence band: 0.01° and 0.01°/s.
pub const THETA_TOL: f64 = 0.01 * core::f64::consts::PI / 180.0;
pub const OMEGA_TOL: f64 = 0.01 * core::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    RestToRest,
    TrackGenerator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub initial: BodyState,
    pub satellite: SatelliteParams,
    pub control: ControlParams,
    pub disturbance: Disturbance,
    /// Control update rate [Hz].
    pub control_frequency: f64,
    /// Integration step [s]; must divide the control period.
    pub dt: f64,
    pub duration: f64,
    pub theta_tol: f64,
    pub omega_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimError {
    Definition(&'static str),
    Desired(DesiredError),
    Control { t: f64, error: ControlError },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Definition(m) => write!(f, "scenario definition: {m}"),
            SimError::Desired(e) => write!(f, "{e}"),
            SimError::Control { t, error } => write!(f, "{error} (t = {t} s)"),
        }
    }
}

impl core::error::Error for SimError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            SimError::Desired(e) => Some(e),
            SimError::Control { error, .. } => Some(error),
            SimError::Definition(_) => None,
        }
    }
}

impl From<DesiredError> for SimError {
    fn from(e: DesiredError) -> Self {
        SimError::Desired(e)
    }
}

impl Scenario {
    /// Reference setup: reference spacecraft, default gains, 10 Hz control,
    /// 0.01 s integration, disturbance on.
    pub fn reference(kind: ScenarioKind, initial: BodyState, duration: f64) -> Scenario {
        Scenario {
            kind,
            initial,
            satellite: SatelliteParams::reference(),
            control: ControlParams::default(),
            disturbance: Disturbance::REFERENCE,
            control_frequency: 10.0,
            dt: 0.01,
            duration,
            theta_tol: THETA_TOL,
            omega_tol: OMEGA_TOL,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.control_frequency
    }

    /// Integration substeps per control period.
    pub fn substeps(&self) -> Result<usize, SimError> {
        let ratio = self.period() / self.dt;
        let n = libm::round(ratio);
        if !(n >= 1.0) || (ratio - n).abs() > 1e-9 * ratio {
            return Err(SimError::Definition("integration step must divide the control period"));
        }
        Ok(n as usize)
    }

    /// Number of control cycles in the run.
    pub fn cycles(&self) -> usize {
        libm::round(self.duration * self.control_frequency) as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::Definition("duration must be > 0"));
        }
        if !(self.control_frequency > 0.0 && self.control_frequency.is_finite()) {
            return Err(SimError::Definition("control frequency must be > 0"));
        }
        if !(self.dt > 0.0) {
            return Err(SimError::Definition("integration step must be > 0"));
        }
        if !(self.theta_tol > 0.0 && self.omega_tol > 0.0) {
            return Err(SimError::Definition("convergence thresholds must be > 0"));
        }
        self.substeps()?;
        self.control
            .validate()
            .map_err(|error| SimError::Control { t: 0.0, error })
    }
}

/// Rest-to-rest maneuver from the identity attitude to a rotation of `angle` about `axis`.
pub fn rest_to_rest(axis: Vec3, angle: f64, duration: f64) -> Result<(Scenario, FixedAttitude), SimError> {
    if !(0.0..=core::f64::consts::PI).contains(&angle) {
        return Err(SimError::Definition("maneuver angle must lie in [0, pi]"));
    }
    let q_d = Quaternion::from_axis_angle(axis, angle)
        .map_err(|_| SimError::Definition("maneuver axis must be finite and non-zero"))?;
    Ok((
        Scenario::reference(ScenarioKind::RestToRest, BodyState::at_rest(Quaternion::IDENTITY), duration),
        FixedAttitude { q_d },
    ))
}

/// One control cycle as seen by an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub state: BodyState,
    pub desired: DesiredSample,
    pub output: ControlOutput,
    /// `T_{B/O}` and `T_{D/O}` Euler 3-2-1 angles (yaw, pitch, roll).
    pub euler_b: (f64, f64, f64),
    pub euler_d: (f64, f64, f64),
}

impl CycleRecord {
    pub fn segment_id(&self) -> u8 {
        self.output.segment as u8
    }
    pub fn flags(&self) -> ControlFlags {
        self.output.flags
    }
}

/// Receives simulation progress. Both methods default to no-ops.
pub trait Observer {
    fn on_cycle(&mut self, _record: &CycleRecord) {}
    /// Called after every integration step with the torque held over it.
    fn on_substep(&mut self, _state: &BodyState, _u: Vec3) {}
}

impl Observer for () {}

/// Streaming hold-to-end convergence detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceTracker {
    pub theta_tol: f64,
    pub omega_tol: f64,
    since: Option<f64>,
    first: Option<f64>,
    samples: usize,
}

impl ConvergenceTracker {
    pub fn new(theta_tol: f64, omega_tol: f64) -> Self {
        ConvergenceTracker {
            theta_tol,
            omega_tol,
            since: None,
            first: None,
            samples: 0,
        }
    }

    pub fn push(&mut self, t: f64, theta_e: f64, omega_e: f64) {
        self.samples += 1;
        if theta_e < self.theta_tol && omega_e < self.omega_tol {
            if self.since.is_none() {
                self.since = Some(t);
            }
            self.first.get_or_insert(t);
        } else {
            self.since = None;
        }
    }

    /// Start of the final run of in-band samples, `None` if the last sample is out of band.
    pub fn converged_at(&self) -> Option<f64> {
        self.since
    }

    /// First in-band sample, whether or not the band was held afterwards.
    pub fn first_entry(&self) -> Option<f64> {
        self.first
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceError {
    EmptyStream,
}

impl fmt::Display for ConvergenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid argument: empty telemetry stream")
    }
}

impl core::error::Error for ConvergenceError {}

/// First time after which both error bands hold to the end of a `(t, θ_e, ‖ω_e‖)` stream.
/// `Ok(None)` means never converged.
pub fn detect_convergence<I>(stream: I, theta_tol: f64, omega_tol: f64) -> Result<Option<f64>, ConvergenceError>
where
    I: IntoIterator<Item = (f64, f64, f64)>,
{
    let mut tr = ConvergenceTracker::new(theta_tol, omega_tol);
    for (t, th, w) in stream {
        tr.push(t, th, w);
    }
    if tr.samples() == 0 {
        return Err(ConvergenceError::EmptyStream);
    }
    Ok(tr.converged_at())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CubicStats {
    pub evaluations: usize,
    pub max_scaled_residual: f64,
    pub clamped: usize,
    /// Non-finite roots. Roots pushed into `[0, τ3]` beyond rounding count in `clamped`.
    pub out_of_range: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub cycles: usize,
    /// `None` if the run never settled in the convergence band.
    pub slew_time: Option<f64>,
    /// First time both errors were inside the band, relative to the start.
    pub first_entry: Option<f64>,
    /// Largest `‖ω_B‖` over all integration steps.
    pub max_rate: f64,
    pub max_torque: f64,
    pub cubic: CubicStats,
    pub saturated_cycles: usize,
    pub budget_exhausted_cycles: usize,
    pub final_theta_e: f64,
    pub final_omega_e: f64,
}

/// Run the closed loop: each cycle samples the desired frame, computes the
/// command from the state at the cycle start and holds it over the
/// integration substeps.
pub fn simulate<D, O>(scenario: &Scenario, desired: &D, observer: &mut O) -> Result<RunSummary, SimError>
where
    D: DesiredFrame + ?Sized,
    O: Observer + ?Sized,
{
    scenario.validate()?;
    let substeps = scenario.substeps()?;
    let period = scenario.period();
    let dt = period / substeps as f64;
    let n = scenario.cycles();
    let sat = &scenario.satellite;

    let mut state = scenario.initial;
    let mut memory = CycleMemory::default();
    let mut conv = ConvergenceTracker::new(scenario.theta_tol, scenario.omega_tol);
    let mut summary = RunSummary {
        cycles: n,
        slew_time: None,
        first_entry: None,
        max_rate: state.omega.norm(),
        max_torque: 0.0,
        cubic: CubicStats::default(),
        saturated_cycles: 0,
        budget_exhausted_cycles: 0,
        final_theta_e: f64::NAN,
        final_omega_e: f64::NAN,
    };
    let t0 = scenario.initial.t;

    for k in 0..n {
        let t = t0 + k as f64 * period;
        state.t = t;
        let d = desired.sample(t)?;
        let (out, mem) = compute_command(&state.q, state.omega, &d, &scenario.control, sat, period, &memory)
            .map_err(|error| SimError::Control { t, error })?;
        memory = mem;

        let reference = desired.reference_frame(t);
        let euler = |q: &Quaternion| {
            let r = q.to_rotation();
            match &reference {
                Some(o) => r.compose(&o.transpose()).euler321(),
                None => r.euler321(),
            }
        };
        let record = CycleRecord {
            cycle: k,
            state,
            desired: d,
            output: out,
            euler_b: euler(&state.q),
            euler_d: euler(&d.q_d),
        };
        observer.on_cycle(&record);

        conv.push(t, out.error.theta_e, out.error.omega_e.norm());
        summary.final_theta_e = out.error.theta_e;
        summary.final_omega_e = out.error.omega_e.norm();
        summary.max_torque = summary.max_torque.max(out.u_cmd.norm());
        summary.saturated_cycles += out.flags.saturated as usize;
        summary.budget_exhausted_cycles += out.flags.budget_exhausted as usize;
        if let (Segment::RampDown, Some(c)) = (out.segment, out.cubic) {
            let s = &mut summary.cubic;
            s.evaluations += 1;
            s.max_scaled_residual = s.max_scaled_residual.max(c.scaled_residual);
            s.clamped += c.clamped as usize;
            if !c.tau.is_finite() {
                s.out_of_range += 1;
            }
        }

        for i in 0..substeps {
            state = rk4_step(&state, out.u_cmd, dt, sat, &scenario.disturbance);
            state.t = t + (i + 1) as f64 * dt;
            summary.max_rate = summary.max_rate.max(state.omega.norm());
            observer.on_substep(&state, out.u_cmd);
        }
    }
    summary.slew_time = conv.converged_at().map(|t| t - t0);
    summary.first_entry = conv.first_entry().map(|t| t - t0);
    Ok(summary)
}

//! Slew-time sweeps over rest-to-rest maneuvers.

use std::io::Write;

use rayon::prelude::*;

use slewctl_core::math::Vec3;
use slewctl_core::rateprofile::ProfileKind;
use slewctl_core::scenario::RunSummary;

use crate::config::{DesiredSpec, InitialAttitude, RunConfig};
use crate::fmt_f64;
use crate::run::run;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// `(label, axis)` pairs.
    pub axes: Vec<(String, Vec3)>,
    pub angles_deg: Vec<f64>,
    pub kinds: Vec<ProfileKind>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            axes: vec![("x".into(), Vec3::X), ("y".into(), Vec3::Y), ("z".into(), Vec3::Z)],
            angles_deg: (1..=18).map(|k| 10.0 * k as f64).collect(),
            kinds: vec![ProfileKind::Trapezoid, ProfileKind::Modified],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: String,
    pub angle_deg: f64,
    pub kind: ProfileKind,
    /// Summary, or the error message of a failed run.
    pub outcome: Result<RunSummary, String>,
}

impl SweepRow {
    pub fn slew_time(&self) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|s| s.slew_time)
    }
}

/// Run every `(axis, angle, kind)` cell on top of `base` (satellite, gains,
/// frequency, duration, disturbance). Failed runs become rows, they never
/// abort the sweep. Rows are ordered by axis, angle, kind.
pub fn slew_sweep(base: &RunConfig, spec: &SweepSpec) -> Vec<SweepRow> {
    let mut cells = Vec::new();
    for (ai, (label, axis)) in spec.axes.iter().enumerate() {
        for (gi, &angle) in spec.angles_deg.iter().enumerate() {
            for (ki, &kind) in spec.kinds.iter().enumerate() {
                cells.push(((ai, gi, ki), label.clone(), *axis, angle, kind));
            }
        }
    }
    let mut rows: Vec<_> = cells
        .into_par_iter()
        .map(|(key, label, axis, angle_deg, kind)| {
            let mut cfg = base.clone();
            cfg.control.kind = kind;
            cfg.scenario.desired = DesiredSpec::RestToRest {
                axis,
                angle: angle_deg.to_radians(),
            };
            cfg.scenario.initial = InitialAttitude::Identity;
            cfg.scenario.initial_omega = None;
            let outcome = if (0.0..=180.0).contains(&angle_deg) {
                run(&cfg, &mut ()).map_err(|e| e.to_string())
            } else {
                Err(format!("maneuver angle {angle_deg} deg outside [0, 180]"))
            };
            (
                key,
                SweepRow {
                    axis: label,
                    angle_deg,
                    kind,
                    outcome,
                },
            )
        })
        .collect();
    rows.sort_by_key(|(k, _)| *k);
    rows.into_iter().map(|(_, r)| r).collect()
}

pub const HEADER: [&str; 12] = [
    "axis",
    "angle_deg",
    "kind",
    "status",
    "slew_time",
    "first_entry",
    "max_rate_deg",
    "max_torque",
    "final_theta_e_deg",
    "final_omega_e_deg",
    "saturated_cycles",
    "error",
];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_string(), fmt_f64)
}

/// CSV table, one row per cell. Non-converged runs report `inf` slew time.
pub fn write_sweep<W: Write>(rows: &[SweepRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(HEADER)?;
    for r in rows {
        let mut rec = vec![r.axis.clone(), fmt_f64(r.angle_deg), r.kind.as_str().to_string()];
        match &r.outcome {
            Ok(s) => rec.extend([
                "ok".to_string(),
                opt(s.slew_time),
                opt(s.first_entry),
                fmt_f64(s.max_rate.to_degrees()),
                fmt_f64(s.max_torque),
                fmt_f64(s.final_theta_e.to_degrees()),
                fmt_f64(s.final_omega_e.to_degrees()),
                s.saturated_cycles.to_string(),
                String::new(),
            ]),
            Err(e) => {
                rec.push("failed".into());
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(e.clone());
            }
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Parse an axis list such as `x,y,z` or `x;1 1 0`: items separated by `,`
/// or `;`, each a body axis name or three space-separated numbers.
pub fn parse_axes(s: &str) -> Option<Vec<(String, Vec3)>> {
    s.split([',', ';'])
        .map(|item| {
            let label = item.trim().to_string();
            let axis = match label.as_str() {
                "x" => Vec3::X,
                "y" => Vec3::Y,
                "z" => Vec3::Z,
                _ => {
                    let v: Vec<f64> = label.split_whitespace().map(|p| p.parse().ok()).collect::<Option<_>>()?;
                    match v[..] {
                        [x, y, z] if x * x + y * y + z * z > 0.0 => Vec3::new(x, y, z),
                        _ => return None,
                    }
                }
            };
            Some((label, axis))
        })
        .collect()
}

/// Parse `start:end:step` (inclusive) or a comma list of angles in degrees.
pub fn parse_angles(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if let [a, b, c] = parts[..] {
        let (a, b, c): (f64, f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?, c.trim().parse().ok()?);
        if !(c > 0.0 && b >= a) {
            return None;
        }
        let n = ((b - a) / c + 1e-9).floor() as usize;
        return Some((0..=n).map(|k| a + c * k as f64).collect());
    }
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

pub fn parse_kinds(s: &str) -> Option<Vec<ProfileKind>> {
    s.split(',').map(ProfileKind::parse).collect()
}

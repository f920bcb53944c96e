//! Desired-frame sample streams stored as CSV.
//!
//! Columns are `t, qx, qy, qz, qw, wx, wy, wz, ax, ay, az`: time [s], `q_{D/I}`
//! and the desired rate and acceleration in D components (SI units). A header
//! row is required and times must be strictly increasing. Between samples the
//! attitude is slerped and the rates are interpolated linearly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use slewctl_core::desired::{DesiredError, DesiredFrame, DesiredSample};
use slewctl_core::math::{Quaternion, Vec3};

use crate::fmt_f64;

pub const COLUMNS: [&str; 11] = ["t", "qx", "qy", "qz", "qw", "wx", "wy", "wz", "ax", "ay", "az"];

/// Quaternions further than this from unit norm are rejected rather than renormalized.
const NORM_TOL: f64 = 1e-6;

/// Slack allowed at either end of the table when sampling.
const END_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum DesiredCsvError {
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("desired csv: line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("desired csv: {0}")]
    Csv(#[from] csv::Error),
}

fn format_err(line: usize, msg: impl Into<String>) -> DesiredCsvError {
    DesiredCsvError::Format { line, msg: msg.into() }
}

/// Tabulated desired frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredTable {
    samples: Vec<DesiredSample>,
}

impl DesiredTable {
    pub fn new(samples: Vec<DesiredSample>) -> Result<Self, DesiredCsvError> {
        if samples.is_empty() {
            return Err(format_err(1, "no samples"));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(format_err(i + 3, format!("time {} does not increase", w[1].t)));
            }
        }
        Ok(DesiredTable { samples })
    }

    pub fn samples(&self) -> &[DesiredSample] {
        &self.samples
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub fn load(path: &Path) -> Result<Self, DesiredCsvError> {
        let f = File::open(path).map_err(|source| DesiredCsvError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(f)
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self, DesiredCsvError> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let header = rd.headers()?.clone();
        let mut index = [0usize; 11];
        for (slot, name) in index.iter_mut().zip(COLUMNS) {
            *slot = header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| format_err(1, format!("missing column `{name}`")))?;
        }
        if header.len() != COLUMNS.len() {
            return Err(format_err(1, format!("expected {} columns, found {}", COLUMNS.len(), header.len())));
        }
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let mut v = [0.0; 11];
            for (k, &i) in index.iter().enumerate() {
                let field = rec.get(i).ok_or_else(|| format_err(line, "short row"))?;
                v[k] = field
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format_err(line, format!("`{}`: not a finite number: `{field}`", COLUMNS[k])))?;
            }
            let raw = Vec3::new(v[1], v[2], v[3]);
            let norm = (raw.norm_squared() + v[4] * v[4]).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(format_err(line, format!("quaternion norm {norm} is not 1")));
            }
            let q_d = Quaternion::new(raw, v[4]).map_err(|e| format_err(line, e.to_string()))?;
            samples.push(DesiredSample {
                t: v[0],
                q_d,
                omega_d: Vec3::new(v[5], v[6], v[7]),
                omega_d_dot: Vec3::new(v[8], v[9], v[10]),
            });
        }
        if samples.is_empty() {
            return Err(format_err(1, "no samples"));
        }
        for w in samples.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(format_err(0, format!("time {} does not increase after {}", w[1].t, w[0].t)));
            }
        }
        Ok(DesiredTable { samples })
    }
}

/// Write samples in the import format.
pub fn write_samples<W: Write>(samples: &[DesiredSample], w: W) -> Result<(), DesiredCsvError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(COLUMNS)?;
    for s in samples {
        let q = s.q_d.to_array();
        let row = [
            s.t,
            q[0],
            q[1],
            q[2],
            q[3],
            s.omega_d.x,
            s.omega_d.y,
            s.omega_d.z,
            s.omega_d_dot.x,
            s.omega_d_dot.y,
            s.omega_d_dot.z,
        ];
        wr.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    wr.flush().map_err(|source| DesiredCsvError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

/// Shortest-arc interpolation from `a` to `b`.
pub fn slerp(a: &Quaternion, b: &Quaternion, f: f64) -> Quaternion {
    let mut rel = *b * a.inverse();
    if rel.scalar() < 0.0 {
        rel = rel.negated();
    }
    let angle = 2.0 * rel.scalar().clamp(-1.0, 1.0).acos();
    match Quaternion::from_axis_angle(rel.vector(), f * angle) {
        Ok(step) if angle > 0.0 => step * *a,
        _ => *a,
    }
}

impl DesiredFrame for DesiredTable {
    fn sample(&self, t: f64) -> Result<DesiredSample, DesiredError> {
        let (start, end) = self.span();
        if !(t >= start - END_SLACK && t <= end + END_SLACK) {
            return Err(DesiredError::OutOfRange { t, start, end });
        }
        let s = &self.samples;
        let i = s.partition_point(|x| x.t <= t);
        if i == 0 {
            return Ok(DesiredSample { t, ..s[0] });
        }
        let a = &s[i - 1];
        if a.t == t || i == s.len() {
            return Ok(DesiredSample { t, ..*a });
        }
        let b = &s[i];
        let f = (t - a.t) / (b.t - a.t);
        Ok(DesiredSample {
            t,
            q_d: slerp(&a.q_d, &b.q_d, f),
            omega_d: a.omega_d * (1.0 - f) + b.omega_d * f,
            omega_d_dot: a.omega_d_dot * (1.0 - f) + b.omega_d_dot * f,
        })
    }
}

//! Per-cycle telemetry records and their CSV form.
//!
//! One row per control cycle, taken at the cycle start before the command is
//! applied. Floats are written with 17 significant digits so a file read back
//! reproduces every record bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use slewctl_core::scenario::{CycleRecord, Observer};

use crate::fmt_f64;

pub const HEADER: [&str; 31] = [
    "t",
    "qx",
    "qy",
    "qz",
    "qw",
    "wx",
    "wy",
    "wz",
    "theta_e",
    "omega_e_norm",
    "omega_b_norm",
    "ux",
    "uy",
    "uz",
    "u_norm",
    "sx",
    "sy",
    "sz",
    "omega_r",
    "alpha_r",
    "omega_r_max",
    "segment",
    "flags",
    "yaw_b",
    "pitch_b",
    "roll_b",
    "yaw_d",
    "pitch_d",
    "roll_d",
    "lyapunov",
    "lyapunov_margin",
];

#[derive(Debug, thiserror::Error)]
pub enum TelemetryError {
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("telemetry: {0}")]
    Csv(#[from] csv::Error),
    #[error("telemetry: line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Angles in radians, rates in rad/s, torques in N·m. Euler angles are 3-2-1
/// (yaw, pitch, roll) relative to the scenario's reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord {
    pub t: f64,
    /// `q_{B/I}` as `[x, y, z, w]`.
    pub q_b: [f64; 4],
    pub omega_b: [f64; 3],
    pub theta_e: f64,
    pub omega_e_norm: f64,
    pub omega_b_norm: f64,
    pub u_cmd: [f64; 3],
    pub u_norm: f64,
    pub s: [f64; 3],
    pub omega_r: f64,
    pub alpha_r: f64,
    pub omega_r_max: f64,
    pub segment: u8,
    pub flags: u32,
    pub euler_b: [f64; 3],
    pub euler_d: [f64; 3],
    pub lyapunov: f64,
    pub lyapunov_margin: f64,
}

impl From<&CycleRecord> for TelemetryRecord {
    fn from(r: &CycleRecord) -> Self {
        let o = &r.output;
        let e = |(y, p, r): (f64, f64, f64)| [y, p, r];
        TelemetryRecord {
            t: r.state.t,
            q_b: r.state.q.to_array(),
            omega_b: r.state.omega.to_array(),
            theta_e: o.error.theta_e,
            omega_e_norm: o.error.omega_e.norm(),
            omega_b_norm: r.state.omega.norm(),
            u_cmd: o.u_cmd.to_array(),
            u_norm: o.u_cmd.norm(),
            s: o.s.to_array(),
            omega_r: o.omega_r,
            alpha_r: o.accel.alpha_r,
            omega_r_max: o.omega_r_max,
            segment: r.segment_id(),
            flags: o.flags.bits(),
            euler_b: e(r.euler_b),
            euler_d: e(r.euler_d),
            lyapunov: o.lyapunov,
            lyapunov_margin: o.lyapunov_margin,
        }
    }
}

impl TelemetryRecord {
    fn fields(&self) -> Vec<String> {
        let mut v = Vec::with_capacity(HEADER.len());
        v.push(fmt_f64(self.t));
        v.extend(self.q_b.iter().map(|&x| fmt_f64(x)));
        v.extend(self.omega_b.iter().map(|&x| fmt_f64(x)));
        for x in [self.theta_e, self.omega_e_norm, self.omega_b_norm] {
            v.push(fmt_f64(x));
        }
        v.extend(self.u_cmd.iter().map(|&x| fmt_f64(x)));
        v.push(fmt_f64(self.u_norm));
        v.extend(self.s.iter().map(|&x| fmt_f64(x)));
        for x in [self.omega_r, self.alpha_r, self.omega_r_max] {
            v.push(fmt_f64(x));
        }
        v.push(self.segment.to_string());
        v.push(self.flags.to_string());
        v.extend(self.euler_b.iter().chain(&self.euler_d).map(|&x| fmt_f64(x)));
        v.push(fmt_f64(self.lyapunov));
        v.push(fmt_f64(self.lyapunov_margin));
        v
    }

    fn parse(rec: &csv::StringRecord, line: usize) -> Result<Self, TelemetryError> {
        if rec.len() != HEADER.len() {
            return Err(TelemetryError::Format {
                line,
                msg: format!("expected {} fields, found {}", HEADER.len(), rec.len()),
            });
        }
        let f = |i: usize| -> Result<f64, TelemetryError> {
            rec[i].parse::<f64>().map_err(|_| TelemetryError::Format {
                line,
                msg: format!("`{}`: not a number: `{}`", HEADER[i], &rec[i]),
            })
        };
        let int = |i: usize| -> Result<u32, TelemetryError> {
            rec[i].parse::<u32>().map_err(|_| TelemetryError::Format {
                line,
                msg: format!("`{}`: not an integer: `{}`", HEADER[i], &rec[i]),
            })
        };
        Ok(TelemetryRecord {
            t: f(0)?,
            q_b: [f(1)?, f(2)?, f(3)?, f(4)?],
            omega_b: [f(5)?, f(6)?, f(7)?],
            theta_e: f(8)?,
            omega_e_norm: f(9)?,
            omega_b_norm: f(10)?,
            u_cmd: [f(11)?, f(12)?, f(13)?],
            u_norm: f(14)?,
            s: [f(15)?, f(16)?, f(17)?],
            omega_r: f(18)?,
            alpha_r: f(19)?,
            omega_r_max: f(20)?,
            segment: int(21)? as u8,
            flags: int(22)?,
            euler_b: [f(23)?, f(24)?, f(25)?],
            euler_d: [f(26)?, f(27)?, f(28)?],
            lyapunov: f(29)?,
            lyapunov_margin: f(30)?,
        })
    }
}

/// Streaming CSV writer; usable directly as a simulation observer.
pub struct TelemetryWriter<W: Write> {
    inner: csv::Writer<W>,
    path: PathBuf,
    rows: usize,
    error: Option<csv::Error>,
}

impl<W: Write> TelemetryWriter<W> {
    pub fn new(w: W) -> Result<Self, TelemetryError> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(HEADER)?;
        Ok(TelemetryWriter {
            inner,
            path: PathBuf::from("<stream>"),
            rows: 0,
            error: None,
        })
    }

    pub fn write(&mut self, r: &TelemetryRecord) -> Result<(), TelemetryError> {
        self.inner.write_record(r.fields())?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Flush and surface the first error hit while observing.
    pub fn finish(mut self) -> Result<usize, TelemetryError> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        let path = self.path;
        self.inner.flush().map_err(|source| TelemetryError::Io { path, source })?;
        Ok(self.rows)
    }
}

impl TelemetryWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self, TelemetryError> {
        let f = File::create(path).map_err(|source| TelemetryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = Self::new(BufWriter::new(f))?;
        w.path = path.to_path_buf();
        Ok(w)
    }
}

impl<W: Write> Observer for TelemetryWriter<W> {
    fn on_cycle(&mut self, record: &CycleRecord) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.inner.write_record(TelemetryRecord::from(record).fields()) {
            self.error = Some(e);
        } else {
            self.rows += 1;
        }
    }
}

/// Collects records in memory.
#[derive(Debug, Default, Clone)]
pub struct TelemetryBuffer {
    pub records: Vec<TelemetryRecord>,
}

impl Observer for TelemetryBuffer {
    fn on_cycle(&mut self, record: &CycleRecord) {
        self.records.push(record.into());
    }
}

pub fn write_telemetry(records: &[TelemetryRecord], path: &Path) -> Result<(), TelemetryError> {
    let mut w = TelemetryWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish().map(|_| ())
}

pub fn read_telemetry_from<R: Read>(r: R) -> Result<Vec<TelemetryRecord>, TelemetryError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(TelemetryError::Format {
            line: 1,
            msg: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push(TelemetryRecord::parse(&rec, line)?);
    }
    Ok(out)
}

pub fn read_telemetry(path: &Path) -> Result<Vec<TelemetryRecord>, TelemetryError> {
    let f = File::open(path).map_err(|source| TelemetryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_telemetry_from(f)
}

//! Voltage traces as a compact little-endian binary file or as CSV.
//!
//! Binary layout: `b"PTRC"`, version `u16`, sample period `f64` seconds,
//! sample count `u64`, then one `f32` per sample.

use std::io::{Read, Write};
use std::path::Path;

use photon_discrim_core::VoltageTrace;
use serde::{Deserialize, Serialize};

use super::{open, read_rows, write_rows};
use crate::error::{AppError, Result};

pub const MAGIC: [u8; 4] = *b"PTRC";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8;

pub fn write_ptrc(out: &mut impl Write, trace: &VoltageTrace) -> std::io::Result<()> {
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&trace.sample_period.to_le_bytes())?;
    out.write_all(&(trace.samples.len() as u64).to_le_bytes())?;
    for v in &trace.samples {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Parses a binary trace. The error string describes what was malformed.
pub fn read_ptrc(input: &mut impl Read) -> std::result::Result<VoltageTrace, String> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|_| "truncated header".to_string())?;
    if header[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let period = f64::from_le_bytes(header[6..14].try_into().unwrap());
    let count = u64::from_le_bytes(header[14..22].try_into().unwrap());
    let count = usize::try_from(count).map_err(|_| "sample count too large".to_string())?;
    let mut body = Vec::new();
    input.read_to_end(&mut body).map_err(|e| e.to_string())?;
    if body.len() != count * 4 {
        return Err(format!(
            "header declares {count} samples but body holds {} bytes",
            body.len()
        ));
    }
    let samples = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    VoltageTrace::new(samples, period).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    time_s: f64,
    volts: f32,
}

pub fn write_trace_csv(path: &Path, trace: &VoltageTrace) -> Result<()> {
    let rows: Vec<TraceRow> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, &volts)| TraceRow {
            time_s: i as f64 * trace.sample_period,
            volts,
        })
        .collect();
    write_rows(path, &rows)
}

/// Reads a CSV trace; the sample period is the mean spacing of `time_s`.
pub fn read_trace_csv(path: &Path) -> Result<VoltageTrace> {
    let rows: Vec<TraceRow> = read_rows(path)?;
    if rows.len() < 2 {
        return Err(AppError::format(
            path,
            "need at least two samples to infer the period",
        ));
    }
    let span = rows[rows.len() - 1].time_s - rows[0].time_s;
    let period = span / (rows.len() - 1) as f64;
    VoltageTrace::new(rows.into_iter().map(|r| r.volts).collect(), period)
        .map_err(|e| AppError::format(path, e))
}

/// Writes `.csv` paths as CSV and anything else as binary.
pub fn save_trace(path: &Path, trace: &VoltageTrace) -> Result<()> {
    if is_csv(path) {
        return write_trace_csv(path, trace);
    }
    let mut out = super::create(path)?;
    write_ptrc(&mut out, trace)
        .and_then(|_| out.flush())
        .map_err(|e| AppError::io(path, e))
}

pub fn load_trace(path: &Path) -> Result<VoltageTrace> {
    if is_csv(path) {
        return read_trace_csv(path);
    }
    read_ptrc(&mut open(path)?).map_err(|reason| AppError::format(path, reason))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

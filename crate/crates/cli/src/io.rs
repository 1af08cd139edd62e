//! File ingestion and emission: E4-style CSV, generic signal CSV, and beats
//! CSV. All parsers report the offending line number.

use std::fs;
use std::io::Write;
use std::path::Path;

use pulseband_core::{BeatSeries, BeatSource, ChannelRole, Signal};

use crate::errors::{CliError, Result};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Validation {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn parse_fields(path: &Path, line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|field| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, line_no, format!("non-numeric value {field:?}")))
        })
        .collect()
}

/// Read an E4-style export: line 1 is the epoch start time in seconds
/// (fractional allowed), line 2 the sampling rate in Hz, and each following
/// line one sample. Multi-column headers (the device repeats the values per
/// column) are accepted when all columns agree. One-column files yield a
/// single signal with `role`; three-column files yield ACC X/Y/Z.
pub fn read_e4_csv(path: &Path, role: ChannelRole) -> Result<Vec<Signal>> {
    let lines = read_lines(path)?;
    if lines.len() < 2 {
        return Err(parse_err(
            path,
            lines.len().max(1),
            "expected a start-time line and a sampling-rate line",
        ));
    }
    let header_value = |line_no: usize, what: &str| -> Result<f64> {
        let fields = parse_fields(path, line_no + 1, &lines[line_no])?;
        if fields.is_empty() {
            return Err(parse_err(path, line_no + 1, format!("missing {what}")));
        }
        if fields.iter().any(|v| v != &fields[0]) {
            return Err(parse_err(
                path,
                line_no + 1,
                format!("{what} differs across columns"),
            ));
        }
        Ok(fields[0])
    };
    let epoch_s = header_value(0, "start time")?;
    let fs = header_value(1, "sampling rate")?;
    if !(fs > 0.0) {
        return Err(parse_err(path, 2, format!("sampling rate {fs} not positive")));
    }
    let start_ms = (epoch_s * 1000.0).round() as i64;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(2) {
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(path, i + 1, line)?;
        if columns.is_empty() {
            if fields.len() != 1 && fields.len() != 3 {
                return Err(parse_err(
                    path,
                    i + 1,
                    format!("expected 1 or 3 sample columns, found {}", fields.len()),
                ));
            }
            columns = vec![Vec::new(); fields.len()];
        }
        if fields.len() != columns.len() {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected {} columns, found {}", columns.len(), fields.len()),
            ));
        }
        for (col, v) in columns.iter_mut().zip(fields) {
            col.push(v);
        }
    }
    if columns.is_empty() {
        return Err(parse_err(path, lines.len(), "file contains no samples"));
    }

    let roles: Vec<ChannelRole> = if columns.len() == 3 {
        vec![ChannelRole::AccX, ChannelRole::AccY, ChannelRole::AccZ]
    } else {
        vec![role]
    };
    columns
        .into_iter()
        .zip(roles)
        .map(|(samples, r)| {
            Signal::new(samples, fs, start_ms, r).map_err(CliError::from)
        })
        .collect()
}

/// Read a generic signal CSV with header `time_ms,value`. The sampling rate
/// comes from the manifest; the first row's time is the start time.
pub fn read_generic_csv(path: &Path, fs: f64, role: ChannelRole) -> Result<Signal> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, 1, "empty file"));
    }
    let header = lines[0].trim();
    if header != "time_ms,value" {
        return Err(parse_err(
            path,
            1,
            format!("expected header \"time_ms,value\", found {header:?}"),
        ));
    }
    let mut start_ms: Option<i64> = None;
    let mut samples = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(path, i + 1, line)?;
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        }
        if start_ms.is_none() {
            start_ms = Some(fields[0].round() as i64);
        }
        samples.push(fields[1]);
    }
    let start = start_ms
        .ok_or_else(|| parse_err(path, lines.len(), "file contains no samples"))?;
    Signal::new(samples, fs, start, role).map_err(CliError::from)
}

/// Generic 4-column accelerometer CSV: `time_ms,x,y,z`.
pub fn read_generic_acc_csv(path: &Path, fs: f64) -> Result<[Signal; 3]> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, 1, "empty file"));
    }
    if lines[0].trim() != "time_ms,x,y,z" {
        return Err(parse_err(
            path,
            1,
            format!("expected header \"time_ms,x,y,z\", found {:?}", lines[0].trim()),
        ));
    }
    let mut start_ms: Option<i64> = None;
    let mut cols: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_fields(path, i + 1, line)?;
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected 4 columns, found {}", fields.len()),
            ));
        }
        if start_ms.is_none() {
            start_ms = Some(fields[0].round() as i64);
        }
        for (c, v) in cols.iter_mut().zip(&fields[1..]) {
            c.push(*v);
        }
    }
    let start = start_ms
        .ok_or_else(|| parse_err(path, lines.len(), "file contains no samples"))?;
    let [x, y, z] = cols;
    Ok([
        Signal::new(x, fs, start, ChannelRole::AccX)?,
        Signal::new(y, fs, start, ChannelRole::AccY)?,
        Signal::new(z, fs, start, ChannelRole::AccZ)?,
    ])
}

/// Read a beats CSV: header `time_ms`, one integer timestamp per line,
/// strictly increasing.
pub fn read_beats_csv(path: &Path, source: BeatSource) -> Result<BeatSeries> {
    let lines = read_lines(path)?;
    if lines.is_empty() || lines[0].trim() != "time_ms" {
        return Err(parse_err(path, 1, "expected header \"time_ms\""));
    }
    let mut times = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let t: i64 = line.trim().parse().map_err(|_| {
            parse_err(path, i + 1, format!("non-integer timestamp {:?}", line.trim()))
        })?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(CliError::Validation {
                    path: path.to_path_buf(),
                    message: format!(
                        "line {}: beat times must be strictly increasing ({prev} then {t})",
                        i + 1
                    ),
                });
            }
        }
        times.push(t);
    }
    BeatSeries::new(times, source).map_err(CliError::from)
}

pub fn write_beats_csv(path: &Path, beats: &BeatSeries) -> Result<()> {
    let mut out = String::from("time_ms\n");
    for t in beats.times_ms() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Write a signal as a generic CSV (`time_ms,value`).
pub fn write_generic_csv(path: &Path, signal: &Signal) -> Result<()> {
    let mut out = String::from("time_ms,value\n");
    for (i, v) in signal.samples().iter().enumerate() {
        let t = signal.start_time_ms() as f64 + signal.sample_time_ms(i);
        out.push_str(&format!("{:.3},{}\n", t, fmt_f64(*v)));
    }
    atomic_write(path, out.as_bytes())
}

/// Shortest round-trip float formatting (deterministic).
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp.partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

//! Waveform container, resampling, segmentation, and windowing.
//!
//! Timestamps are integer milliseconds throughout the workspace;
//! sub-millisecond positions produced by interpolation are rounded half-up so
//! the 150 ms / 20 ms grid arithmetic used by beat matching stays exact.

use crate::error::{Error, Result};

/// Which physical channel a waveform came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelRole {
    Ppg,
    Ecg,
    AccX,
    AccY,
    AccZ,
}

impl ChannelRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelRole::Ppg => "ppg",
            ChannelRole::Ecg => "ecg",
            ChannelRole::AccX => "acc_x",
            ChannelRole::AccY => "acc_y",
            ChannelRole::AccZ => "acc_z",
        }
    }
}

/// Uniformly sampled waveform. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
    start_time_ms: i64,
    role: ChannelRole,
}

impl Signal {
    /// Validates fs > 0 and that every sample is finite; NaN/Inf never get
    /// past construction.
    pub fn new(samples: Vec<f64>, fs: f64, start_time_ms: i64, role: ChannelRole) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be positive and finite, got {fs}"
            )));
        }
        if let Some(idx) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample at index {idx}"
            )));
        }
        Ok(Self {
            samples,
            fs,
            start_time_ms,
            role,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn start_time_ms(&self) -> i64 {
        self.start_time_ms
    }

    pub fn role(&self) -> ChannelRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Derived, never stored: `len / fs * 1000`.
    pub fn duration_ms(&self) -> f64 {
        self.samples.len() as f64 / self.fs * 1000.0
    }

    /// Time of sample `i` in ms relative to the signal start.
    pub fn sample_time_ms(&self, i: usize) -> f64 {
        i as f64 * 1000.0 / self.fs
    }
}

/// Round to integer milliseconds, halves up.
pub fn round_half_up_ms(t: f64) -> i64 {
    (t + 0.5).floor() as i64
}

/// Half-open window `[start_ms, start_ms + length_ms)` relative to the
/// recording start. Windows tile the recording without overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start_ms: i64,
    pub length_ms: i64,
}

impl Window {
    pub fn end_ms(&self) -> i64 {
        self.start_ms + self.length_ms
    }

    pub fn contains(&self, t_ms: i64) -> bool {
        t_ms >= self.start_ms && t_ms < self.end_ms()
    }
}

/// Linear interpolation onto a uniform grid at `target_fs`, preserving the
/// first sample time. The output never extrapolates past the last input
/// sample, so its duration is within one output-sample period of the input
/// duration.
pub fn resample(signal: &Signal, target_fs: f64) -> Result<Signal> {
    if !(target_fs > 0.0) || !target_fs.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target sampling rate must be positive, got {target_fs}"
        )));
    }
    if signal.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "resample needs at least 2 samples, got {}",
            signal.len()
        )));
    }
    if target_fs == signal.fs {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    let ratio = signal.fs / target_fs; // input samples per output sample
    let n_out = ((x.len() - 1) as f64 / ratio).floor() as usize + 1;
    let mut out = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let pos = k as f64 * ratio;
        let i = pos.floor() as usize;
        if i + 1 >= x.len() {
            out.push(x[x.len() - 1]);
        } else {
            let frac = pos - i as f64;
            out.push(x[i] * (1.0 - frac) + x[i + 1] * frac);
        }
    }
    Signal::new(out, target_fs, signal.start_time_ms, signal.role)
}

/// Split into consecutive non-overlapping windows of `window_ms`. A trailing
/// partial window shorter than `window_ms` is dropped so per-window metrics
/// stay comparable.
pub fn segment(signal: &Signal, window_ms: i64) -> Result<Vec<(Window, Signal)>> {
    if window_ms <= 0 {
        return Err(Error::InvalidInput(format!(
            "window length must be positive, got {window_ms} ms"
        )));
    }
    let n_windows = (signal.duration_ms() / window_ms as f64).floor() as usize;
    let boundary = |w: usize| -> usize {
        // First sample index at or after w * window_ms.
        ((w as i64 * window_ms) as f64 * signal.fs / 1000.0).ceil() as usize
    };
    let mut out = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let lo = boundary(w);
        let hi = boundary(w + 1).min(signal.len());
        let window = Window {
            start_ms: w as i64 * window_ms,
            length_ms: window_ms,
        };
        let chunk = Signal::new(
            signal.samples[lo..hi].to_vec(),
            signal.fs,
            signal.start_time_ms + window.start_ms,
            signal.role,
        )?;
        out.push((window, chunk));
    }
    Ok(out)
}

/// Windows tiling `[0, duration_ms)`, trailing partial dropped.
pub fn tile_windows(duration_ms: f64, window_ms: i64) -> Vec<Window> {
    if window_ms <= 0 {
        return Vec::new();
    }
    let n = (duration_ms / window_ms as f64).floor() as usize;
    (0..n)
        .map(|w| Window {
            start_ms: w as i64 * window_ms,
            length_ms: window_ms,
        })
        .collect()
}

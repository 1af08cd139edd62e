//! IIR band-pass filter design and zero-phase application.
//!
//! Three families are supported, each realized as a cascade of second-order
//! sections via analog prototype -> band-pass transform -> bilinear transform
//! with frequency prewarping:
//!
//! * Chebyshev Type-II (PPG preprocessing). `f_low`/`f_high` are the
//!   *stopband edges*: magnitude is at or below the design attenuation
//!   outside them and the passband between them is monotone (no ripple).
//! * Elliptic (ECG preprocessing). `f_low`/`f_high` are the passband edges
//!   where attenuation first reaches the passband ripple.
//! * Butterworth (motion metric). `f_low`/`f_high` are the -3 dB points.

mod design;
mod elliptic;
mod zero_phase;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Supported analog prototype families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterFamily {
    Chebyshev2,
    Elliptic,
    Butterworth,
}

impl FilterFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterFamily::Chebyshev2 => "chebyshev2",
            FilterFamily::Elliptic => "elliptic",
            FilterFamily::Butterworth => "butterworth",
        }
    }
}

/// Band-pass design request. `order` is the analog prototype order; the
/// band-pass realization has `order` biquad sections (2 x order poles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub family: FilterFamily,
    pub order: usize,
    pub f_low: f64,
    pub f_high: f64,
    /// Stopband attenuation in dB (Chebyshev-II and elliptic).
    pub stopband_atten_db: f64,
    /// Passband ripple in dB (elliptic only).
    pub passband_ripple_db: f64,
}

impl FilterSpec {
    pub fn chebyshev2(order: usize, f_low: f64, f_high: f64, stopband_atten_db: f64) -> Self {
        Self {
            family: FilterFamily::Chebyshev2,
            order,
            f_low,
            f_high,
            stopband_atten_db,
            passband_ripple_db: 0.0,
        }
    }

    pub fn elliptic(
        order: usize,
        f_low: f64,
        f_high: f64,
        passband_ripple_db: f64,
        stopband_atten_db: f64,
    ) -> Self {
        Self {
            family: FilterFamily::Elliptic,
            order,
            f_low,
            f_high,
            stopband_atten_db,
            passband_ripple_db,
        }
    }

    pub fn butterworth(order: usize, f_low: f64, f_high: f64) -> Self {
        Self {
            family: FilterFamily::Butterworth,
            order,
            f_low,
            f_high,
            stopband_atten_db: 0.0,
            passband_ripple_db: 0.0,
        }
    }
}

/// One second-order section, transfer function
/// `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Magnitude of the pole furthest from the origin.
    pub fn max_pole_radius(&self) -> f64 {
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc < 0.0 {
            // complex pair: |p|^2 = a2
            self.a2.max(0.0).sqrt()
        } else {
            let s = disc.sqrt();
            let r1 = (-self.a1 + s) / 2.0;
            let r2 = (-self.a1 - s) / 2.0;
            r1.abs().max(r2.abs())
        }
    }

    pub fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Response at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::new(0.0, -omega).exp();
        let z2 = z1 * z1;
        (z1 * self.b1 + z2 * self.b2 + self.b0) / (z1 * self.a1 + z2 * self.a2 + 1.0)
    }
}

/// Ordered cascade of biquads. Construction verifies that every section is
/// stable (all pole magnitudes < 1 - 1e-9); a violation indicates a numerics
/// bug in the design path, not bad user input.
#[derive(Debug, Clone, PartialEq)]
pub struct SosCascade {
    sections: Vec<Biquad>,
}

impl SosCascade {
    pub fn new(sections: Vec<Biquad>) -> Result<Self> {
        for (i, sec) in sections.iter().enumerate() {
            let r = sec.max_pole_radius();
            if !(r < 1.0 - 1e-9) {
                return Err(Error::DesignFailure(format!(
                    "section {i} is unstable: pole radius {r}"
                )));
            }
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn num_sections(&self) -> usize {
        self.sections.len()
    }

    pub fn max_pole_radius(&self) -> f64 {
        self.sections
            .iter()
            .map(Biquad::max_pole_radius)
            .fold(0.0, f64::max)
    }
}

/// Design a band-pass cascade for `spec` at sampling rate `fs`.
pub fn design_bandpass(spec: &FilterSpec, fs: f64) -> Result<SosCascade> {
    if !(fs > 0.0) || !fs.is_finite() {
        return Err(Error::InvalidInput(format!(
            "sampling rate must be positive, got {fs}"
        )));
    }
    if spec.order < 2 || spec.order % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "band-pass realization needs an even order >= 2, got {}",
            spec.order
        )));
    }
    if !(spec.f_low > 0.0) || !(spec.f_low < spec.f_high) {
        return Err(Error::InvalidBand {
            f_low: spec.f_low,
            f_high: spec.f_high,
        });
    }
    if spec.f_high >= fs / 2.0 {
        return Err(Error::NyquistViolation {
            f_high: spec.f_high,
            nyquist: fs / 2.0,
        });
    }
    design::design(spec, fs)
}

/// Zero-phase (forward-backward) filtering. Output length equals input
/// length; beat timing is preserved because the net phase shift is zero.
pub fn apply_zero_phase(cascade: &SosCascade, signal: &Signal) -> Result<Signal> {
    let filtered = zero_phase::sosfiltfilt(cascade, signal.samples())?;
    Signal::new(
        filtered,
        signal.fs(),
        signal.start_time_ms(),
        signal.role(),
    )
}

/// Complex response of the cascade at each frequency in `freqs` (Hz).
pub fn frequency_response(
    cascade: &SosCascade,
    freqs: &[f64],
    fs: f64,
) -> Result<Vec<Complex64>> {
    let nyquist = fs / 2.0;
    freqs
        .iter()
        .map(|&f| {
            if !(0.0..=nyquist).contains(&f) {
                return Err(Error::InvalidFrequency(f));
            }
            let omega = 2.0 * std::f64::consts::PI * f / fs;
            Ok(cascade
                .sections
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(omega)))
        })
        .collect()
}

/// Magnitude response at a single frequency.
pub fn magnitude_at(cascade: &SosCascade, freq: f64, fs: f64) -> Result<f64> {
    Ok(frequency_response(cascade, &[freq], fs)?[0].norm())
}

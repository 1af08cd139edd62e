//! Synthetic ECG/PPG generation with known ground-truth beat times, so every
//! pipeline stage and the optimizer are verifiable without recorded data.
//!
//! The PPG pulse is a pair of Gaussian bumps per beat (systolic + smaller,
//! delayed diastolic wave) with respiratory amplitude modulation; the ECG is
//! a narrow R spike with smaller P/T bumps. Gaussian morphology keeps the
//! middle-amplitude point of the clean systolic upstroke available in closed
//! form: it is the half-maximum of the rising edge,
//! `t_beat - sigma_sys * sqrt(2 ln 2)`.
//!
//! All randomness comes from [`crate::rng::SplitMix64`] seeded from
//! `SynthConfig::seed` (channel-specific salts below), so identical configs
//! reproduce identical signals bit for bit on any platform.

use crate::beat::{BeatSeries, BeatSource};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::signal::{round_half_up_ms, ChannelRole, Signal};

/// Systolic bump width, ms.
pub const SYSTOLIC_SIGMA_MS: f64 = 80.0;
/// Diastolic bump width, ms.
pub const DIASTOLIC_SIGMA_MS: f64 = 100.0;
/// Diastolic bump delay after the beat, ms.
pub const DIASTOLIC_DELAY_MS: f64 = 300.0;

const SEED_SALT_PPG: u64 = 0x70_70_67; // "ppg"
const SEED_SALT_ECG: u64 = 0x65_63_67; // "ecg"

/// Parameters for synthetic signal generation.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub duration_s: f64,
    pub mean_hr_bpm: f64,
    /// Gaussian jitter applied to each IBI, ms.
    pub hrv_sd_ms: f64,
    /// Respiratory amplitude modulation of the PPG pulse train.
    pub resp_rate_hz: f64,
    pub resp_amp_frac: f64,
    /// Diastolic wave amplitude as a fraction of the systolic wave, in [0, 1).
    pub diastolic_frac: f64,
    /// Additive white noise level; `None` for a clean signal.
    pub noise_snr_db: Option<f64>,
    pub baseline_wander_hz: f64,
    pub baseline_wander_amp: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration_s: 60.0,
            mean_hr_bpm: 70.0,
            hrv_sd_ms: 20.0,
            resp_rate_hz: 0.25,
            resp_amp_frac: 0.1,
            diastolic_frac: 0.3,
            noise_snr_db: None,
            baseline_wander_hz: 0.1,
            baseline_wander_amp: 0.0,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if !(30.0..=220.0).contains(&self.mean_hr_bpm) {
            return Err(Error::InvalidInput(format!(
                "mean heart rate must be within [30, 220] bpm, got {}",
                self.mean_hr_bpm
            )));
        }
        if !(0.0..1.0).contains(&self.diastolic_frac) {
            return Err(Error::InvalidInput(format!(
                "diastolic fraction must be in [0, 1), got {}",
                self.diastolic_frac
            )));
        }
        Ok(())
    }
}

/// Ground-truth beat times: IBIs drawn as `60000/hr + N(0, hrv_sd)` clipped
/// to [300, 2000] ms, accumulated from t = 0 until duration.
pub fn gen_beat_times(cfg: &SynthConfig) -> Result<Vec<i64>> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let mean_ibi = 60_000.0 / cfg.mean_hr_bpm;
    let duration_ms = cfg.duration_s * 1000.0;
    let mut beats = Vec::new();
    let mut t = 0.0;
    while t < duration_ms {
        beats.push(round_half_up_ms(t));
        let ibi = (mean_ibi + cfg.hrv_sd_ms * rng.next_gaussian()).clamp(300.0, 2000.0);
        t += ibi;
    }
    Ok(beats)
}

/// Middle-amplitude point of the clean systolic upstroke for each beat
/// (closed form for the Gaussian bump: half-maximum of the rising edge).
pub fn ground_truth_ppg_beats(beats: &[i64]) -> Result<BeatSeries> {
    let lead = SYSTOLIC_SIGMA_MS * (2.0 * 2.0_f64.ln()).sqrt();
    let times: Vec<i64> = beats
        .iter()
        .map(|&b| round_half_up_ms(b as f64 - lead))
        .collect();
    BeatSeries::new(times, BeatSource::Ppg)
}

fn accumulate_bumps(
    samples: &mut [f64],
    fs: f64,
    centers_ms: &[f64],
    amp: f64,
    sigma_ms: f64,
) {
    if amp == 0.0 {
        return;
    }
    let half_window = 5.0 * sigma_ms;
    for &c in centers_ms {
        let lo = (((c - half_window) * fs / 1000.0).floor().max(0.0)) as usize;
        let hi = ((((c + half_window) * fs / 1000.0).ceil()) as usize).min(samples.len());
        for (i, v) in samples.iter_mut().enumerate().take(hi).skip(lo) {
            let t = i as f64 * 1000.0 / fs;
            let z = (t - c) / sigma_ms;
            *v += amp * (-0.5 * z * z).exp();
        }
    }
}

fn add_noise(samples: &mut [f64], snr_db: Option<f64>, rng: &mut SplitMix64) {
    let Some(snr) = snr_db else { return };
    let n = samples.len() as f64;
    let power = samples.iter().map(|v| v * v).sum::<f64>() / n;
    let sd = (power * 10f64.powf(-snr / 10.0)).sqrt();
    for v in samples.iter_mut() {
        *v += sd * rng.next_gaussian();
    }
}

/// Synthesize a PPG channel for the given beat times. Returns the signal and
/// the analytic ground-truth beat series (middle-amplitude convention).
pub fn gen_ppg(beats: &[i64], fs: f64, cfg: &SynthConfig) -> Result<(Signal, BeatSeries)> {
    cfg.validate()?;
    if !(fs > 0.0) {
        return Err(Error::InvalidInput(format!("fs must be positive: {fs}")));
    }
    let n = (cfg.duration_s * fs).round() as usize;
    let mut pulses = vec![0.0; n];
    let centers: Vec<f64> = beats.iter().map(|&b| b as f64).collect();
    accumulate_bumps(&mut pulses, fs, &centers, 1.0, SYSTOLIC_SIGMA_MS);
    if cfg.diastolic_frac > 0.0 {
        let dia: Vec<f64> = centers.iter().map(|c| c + DIASTOLIC_DELAY_MS).collect();
        accumulate_bumps(&mut pulses, fs, &dia, cfg.diastolic_frac, DIASTOLIC_SIGMA_MS);
    }
    let mut samples: Vec<f64> = pulses
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let t_s = i as f64 / fs;
            let modulation = 1.0
                + cfg.resp_amp_frac * (2.0 * std::f64::consts::PI * cfg.resp_rate_hz * t_s).sin();
            p * modulation
        })
        .collect();
    if cfg.baseline_wander_amp != 0.0 {
        for (i, v) in samples.iter_mut().enumerate() {
            let t_s = i as f64 / fs;
            *v += cfg.baseline_wander_amp
                * (2.0 * std::f64::consts::PI * cfg.baseline_wander_hz * t_s).sin();
        }
    }
    let mut rng = SplitMix64::new(cfg.seed.wrapping_add(SEED_SALT_PPG));
    add_noise(&mut samples, cfg.noise_snr_db, &mut rng);
    let signal = Signal::new(samples, fs, 0, ChannelRole::Ppg)?;
    Ok((signal, ground_truth_ppg_beats(beats)?))
}

/// Synthesize an ECG channel: unit R spike per beat plus smaller P/T bumps.
pub fn gen_ecg(beats: &[i64], fs: f64, cfg: &SynthConfig) -> Result<Signal> {
    cfg.validate()?;
    if fs < 100.0 {
        return Err(Error::InvalidInput(format!(
            "ECG synthesis needs fs >= 100 Hz, got {fs}"
        )));
    }
    let n = (cfg.duration_s * fs).round() as usize;
    let mut samples = vec![0.0; n];
    let centers: Vec<f64> = beats.iter().map(|&b| b as f64).collect();
    let p_wave: Vec<f64> = centers.iter().map(|c| c - 180.0).collect();
    let t_wave: Vec<f64> = centers.iter().map(|c| c + 250.0).collect();
    accumulate_bumps(&mut samples, fs, &p_wave, 0.15, 25.0);
    accumulate_bumps(&mut samples, fs, &t_wave, 0.3, 70.0);
    accumulate_bumps(&mut samples, fs, &centers, 1.0, 10.0);
    let mut rng = SplitMix64::new(cfg.seed.wrapping_add(SEED_SALT_ECG));
    add_noise(&mut samples, cfg.noise_snr_db, &mut rng);
    Signal::new(samples, fs, 0, ChannelRole::Ecg)
}

//! Heartbeat detection: R-peaks in ECG (the ground-truth side) and beats in
//! filtered PPG with middle-amplitude localization.

use crate::error::{Error, Result};
use crate::signal::{round_half_up_ms, Signal};

/// Which detector produced a beat series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeatSource {
    Ecg,
    Ppg,
}

/// Strictly increasing beat timestamps in integer milliseconds since signal
/// start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeatSeries {
    times_ms: Vec<i64>,
    source: BeatSource,
}

impl BeatSeries {
    pub fn new(times_ms: Vec<i64>, source: BeatSource) -> Result<Self> {
        for pair in times_ms.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidInput(format!(
                    "beat times must be strictly increasing: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { times_ms, source })
    }

    pub fn empty(source: BeatSource) -> Self {
        Self {
            times_ms: Vec::new(),
            source,
        }
    }

    pub fn times_ms(&self) -> &[i64] {
        &self.times_ms
    }

    pub fn source(&self) -> BeatSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.times_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ms.is_empty()
    }

    /// Successive differences in ms; all positive by construction.
    pub fn ibis_ms(&self) -> Vec<f64> {
        self.times_ms
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64)
            .collect()
    }

    /// Every timestamp shifted by `delta_ms`.
    pub fn shifted(&self, delta_ms: i64) -> Self {
        Self {
            times_ms: self.times_ms.iter().map(|t| t + delta_ms).collect(),
            source: self.source,
        }
    }

    /// Beats with `lo <= t < hi`.
    pub fn in_range(&self, lo: i64, hi: i64) -> &[i64] {
        let start = self.times_ms.partition_point(|&t| t < lo);
        let end = self.times_ms.partition_point(|&t| t < hi);
        &self.times_ms[start..end]
    }
}

/// ECG R-peak detector parameters (Shannon-energy envelope method).
#[derive(Debug, Clone)]
pub struct EcgDetectorConfig {
    /// Moving-average smoothing of the Shannon energy, ms.
    pub smoothing_ms: f64,
    /// R-peak refinement window around each envelope peak, ms.
    pub refine_ms: f64,
    /// Minimum spacing between accepted beats, ms.
    pub refractory_ms: f64,
    /// Block length for the robust envelope threshold, ms.
    pub threshold_block_ms: f64,
    /// Threshold as a fraction of the median block maximum.
    pub threshold_frac: f64,
}

impl Default for EcgDetectorConfig {
    fn default() -> Self {
        Self {
            smoothing_ms: 65.0,
            refine_ms: 80.0,
            refractory_ms: 250.0,
            threshold_block_ms: 2000.0,
            threshold_frac: 0.3,
        }
    }
}

/// PPG beat detector parameters (adaptive moving-average thresholding).
#[derive(Debug, Clone)]
pub struct PpgDetectorConfig {
    /// Moving-average window, ms.
    pub ma_window_ms: f64,
    /// Candidate threshold offsets as percent of the peak excursion above
    /// the moving average.
    pub offset_percents: Vec<f64>,
    /// Plausible mean heart-rate band, bpm.
    pub min_bpm: f64,
    pub max_bpm: f64,
    /// Foot search lookback limit for middle-amplitude localization, ms.
    pub foot_lookback_ms: f64,
}

impl Default for PpgDetectorConfig {
    fn default() -> Self {
        Self {
            ma_window_ms: 750.0,
            offset_percents: vec![
                5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0,
            ],
            min_bpm: 40.0,
            max_bpm: 180.0,
            foot_lookback_ms: 2000.0,
        }
    }
}

fn centered_moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let w = width.max(1);
    let half = w / 2;
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Detect R-peaks in an already band-pass-filtered ECG.
///
/// Pipeline: first difference -> amplitude normalization -> Shannon energy
/// `-x^2 ln(x^2)` -> moving-average smoothing -> envelope peak per beat ->
/// refinement to the absolute-max ECG sample within `refine_ms`, with a
/// refractory period between accepted beats. A flat signal yields an empty
/// series, not an error.
pub fn detect_ecg_beats(ecg: &Signal, cfg: &EcgDetectorConfig) -> Result<BeatSeries> {
    let fs = ecg.fs();
    if fs < 100.0 {
        return Err(Error::InvalidInput(format!(
            "ECG beat detection needs fs >= 100 Hz, got {fs}"
        )));
    }
    let x = ecg.samples();
    if x.len() < 3 {
        return Ok(BeatSeries::empty(BeatSource::Ecg));
    }

    let diff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let max_abs = diff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs <= 0.0 {
        return Ok(BeatSeries::empty(BeatSource::Ecg));
    }
    let shannon: Vec<f64> = diff
        .iter()
        .map(|&d| {
            let v = d / max_abs;
            let sq = v * v;
            if sq < 1e-24 {
                0.0
            } else {
                -sq * sq.ln()
            }
        })
        .collect();
    let width = ((cfg.smoothing_ms * fs / 1000.0).round() as usize).max(1) | 1;
    let env = centered_moving_average(&shannon, width);

    // Robust threshold: fraction of the median per-block maximum, so a single
    // large artifact cannot mask real beats.
    let block = ((cfg.threshold_block_ms * fs / 1000.0).round() as usize).max(1);
    let mut block_maxima: Vec<f64> = env
        .chunks(block)
        .map(|c| c.iter().fold(0.0f64, |m, &v| m.max(v)))
        .collect();
    let threshold = cfg.threshold_frac * median(&mut block_maxima);
    if threshold <= 0.0 {
        return Ok(BeatSeries::empty(BeatSource::Ecg));
    }

    let refractory = ((cfg.refractory_ms * fs / 1000.0).round() as usize).max(1);
    let mut env_peaks: Vec<usize> = Vec::new();
    for i in 1..env.len().saturating_sub(1) {
        if env[i] > threshold && env[i] > env[i - 1] && env[i] >= env[i + 1] {
            match env_peaks.last() {
                Some(&last) if i - last < refractory => {
                    if env[i] > env[last] {
                        *env_peaks.last_mut().unwrap() = i;
                    }
                }
                _ => env_peaks.push(i),
            }
        }
    }

    // Refine each envelope peak to the strongest raw sample nearby, then
    // enforce the refractory period on the refined positions.
    let w = (cfg.refine_ms * fs / 1000.0).round() as usize;
    let mut refined: Vec<usize> = env_peaks
        .iter()
        .map(|&pk| {
            let lo = pk.saturating_sub(w);
            let hi = (pk + w + 1).min(x.len());
            (lo..hi)
                .max_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap())
                .expect("non-empty refine window")
        })
        .collect();
    refined.sort_unstable();
    refined.dedup();
    let mut beats: Vec<usize> = Vec::with_capacity(refined.len());
    for b in refined {
        match beats.last() {
            Some(&last) if b - last < refractory => {
                if x[b].abs() > x[last].abs() {
                    *beats.last_mut().unwrap() = b;
                }
            }
            _ => beats.push(b),
        }
    }

    let times: Vec<i64> = beats
        .iter()
        .map(|&i| round_half_up_ms(i as f64 * 1000.0 / fs))
        .collect();
    BeatSeries::new(times, BeatSource::Ecg)
}

/// Detect candidate apices in an already band-pass-filtered PPG.
///
/// A moving average is computed; for each candidate offset level (percent of
/// the peak excursion above that average) the regions where the signal
/// exceeds average + offset yield one apex each. The level whose inter-peak
/// intervals have the lowest standard deviation, subject to an implied rate
/// within the configured bpm band, wins.
pub fn detect_ppg_apices(ppg: &Signal, cfg: &PpgDetectorConfig) -> Result<Vec<usize>> {
    let fs = ppg.fs();
    let x = ppg.samples();
    if x.len() < 4 {
        return Err(Error::NoBeatsDetected("signal too short".into()));
    }
    let width = ((cfg.ma_window_ms * fs / 1000.0).round() as usize).max(1) | 1;
    let ma = centered_moving_average(x, width);
    let excursion = x
        .iter()
        .zip(&ma)
        .fold(0.0f64, |m, (&v, &a)| m.max(v - a));
    if excursion <= 0.0 {
        return Err(Error::NoBeatsDetected("flat signal".into()));
    }

    let mut best: Option<(f64, Vec<usize>)> = None; // (interval sd, apices)
    for &pct in &cfg.offset_percents {
        let offset = excursion * pct / 100.0;
        let apices = apices_above(x, &ma, offset);
        if apices.len() < 2 {
            continue;
        }
        let span_ms = (apices[apices.len() - 1] - apices[0]) as f64 * 1000.0 / fs;
        if span_ms <= 0.0 {
            continue;
        }
        let bpm = (apices.len() - 1) as f64 * 60_000.0 / span_ms;
        if bpm < cfg.min_bpm || bpm > cfg.max_bpm {
            continue;
        }
        let intervals: Vec<f64> = apices
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 * 1000.0 / fs)
            .collect();
        let mean = intervals.iter().sum::<f64>() / intervals.len() as f64;
        let sd = (intervals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / intervals.len() as f64)
            .sqrt();
        if best.as_ref().map_or(true, |(b, _)| sd < *b) {
            best = Some((sd, apices));
        }
    }
    match best {
        Some((_, apices)) => Ok(apices),
        None => Err(Error::NoBeatsDetected(
            "no threshold level yields a plausible heart rate".into(),
        )),
    }
}

fn apices_above(x: &[f64], ma: &[f64], offset: f64) -> Vec<usize> {
    let mut apices = Vec::new();
    let mut region_start: Option<usize> = None;
    for i in 0..x.len() {
        let above = x[i] > ma[i] + offset;
        match (above, region_start) {
            (true, None) => region_start = Some(i),
            (false, Some(start)) => {
                let apex = (start..i)
                    .max_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
                    .expect("non-empty region");
                apices.push(apex);
                region_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = region_start {
        let apex = (start..x.len())
            .max_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .expect("non-empty region");
        apices.push(apex);
    }
    apices
}

/// Convert apices to beat timestamps at the middle-amplitude point between
/// foot and apex.
///
/// The foot is the minimum sample between the previous apex (or the lookback
/// limit) and the apex; the beat time is the first upward crossing of
/// `(foot + apex) / 2`, linearly interpolated between the two bracketing
/// samples and rounded to integer ms. Apices with no preceding samples or no
/// crossing (flat degenerate pulses) are skipped.
pub fn locate_middle_amplitude(
    ppg: &Signal,
    apices: &[usize],
    cfg: &PpgDetectorConfig,
) -> Result<BeatSeries> {
    let x = ppg.samples();
    let fs = ppg.fs();
    for w in apices.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput("apices must be increasing".into()));
        }
    }
    if let Some(&last) = apices.last() {
        if last >= x.len() {
            return Err(Error::InvalidInput(format!(
                "apex index {last} out of bounds for signal of {} samples",
                x.len()
            )));
        }
    }
    let lookback = ((cfg.foot_lookback_ms * fs / 1000.0).round() as usize).max(1);
    let mut times: Vec<i64> = Vec::with_capacity(apices.len());
    for (k, &apex) in apices.iter().enumerate() {
        if apex == 0 {
            continue; // no preceding samples to search
        }
        let mut lo = apex.saturating_sub(lookback);
        if k > 0 {
            lo = lo.max(apices[k - 1] + 1);
        }
        if lo >= apex {
            continue;
        }
        let foot = (lo..=apex)
            .min_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap())
            .expect("non-empty foot window");
        let level = 0.5 * (x[foot] + x[apex]);
        if x[apex] <= x[foot] {
            continue; // degenerate flat pulse, no crossing exists
        }
        let mut crossing: Option<f64> = None;
        for i in foot..apex {
            if x[i] < level && x[i + 1] >= level {
                let frac = (level - x[i]) / (x[i + 1] - x[i]);
                crossing = Some((i as f64 + frac) * 1000.0 / fs);
                break;
            }
        }
        // The apex itself can sit exactly at the level when foot == apex - 1.
        let t = match crossing {
            Some(t) => t,
            None => continue,
        };
        let t_ms = round_half_up_ms(t);
        if times.last().map_or(true, |&prev| t_ms > prev) {
            times.push(t_ms);
        }
    }
    BeatSeries::new(times, BeatSource::Ppg)
}

/// Full PPG beat detection: apices then middle-amplitude localization.
pub fn detect_ppg_beats(ppg: &Signal, cfg: &PpgDetectorConfig) -> Result<BeatSeries> {
    let apices = detect_ppg_apices(ppg, cfg)?;
    locate_middle_amplitude(ppg, &apices, cfg)
}

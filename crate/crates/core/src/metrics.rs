//! Beat-matching accuracy metrics: lag search, one-to-one matching,
//! Se/PPV/F1, windowed IBI and RMSSD errors, artifact cleaning, the
//! MIMS-like motion metric, and Pearson correlation.

use crate::beat::BeatSeries;
use crate::error::{Error, Result};
use crate::filter::{apply_zero_phase, design_bandpass, FilterSpec};
use crate::signal::{resample, Signal, Window};

/// Outcome of one-to-one beat matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Lag that was applied to the detected series before matching, ms.
    pub lag_ms: i64,
    /// Matched (ecg_time_ms, ppg_time_ms) pairs, ppg times unshifted.
    pub pairs: Vec<(i64, i64)>,
    pub n_correct: usize,
    pub n_ecg: usize,
    pub n_ppg: usize,
}

/// One-to-one matching of PPG beats to ECG beats within `tolerance_ms`.
///
/// Both series are walked in time order and each PPG beat pairs with the
/// earliest unmatched ECG beat within tolerance. For series that respect
/// refractory spacing greater than twice the tolerance this is the
/// nearest-beat pairing, and in all cases the pair count equals the
/// maximum-cardinality matching (each beat is used at most once).
pub fn match_beats(ppg: &BeatSeries, ecg: &BeatSeries, tolerance_ms: i64) -> MatchResult {
    match_with_lag(ppg, ecg, 0, tolerance_ms)
}

/// Like [`match_beats`] but shifts the PPG series by `lag_ms` first; reported
/// pairs keep the original PPG timestamps.
pub fn match_with_lag(
    ppg: &BeatSeries,
    ecg: &BeatSeries,
    lag_ms: i64,
    tolerance_ms: i64,
) -> MatchResult {
    let pt = ppg.times_ms();
    let et = ecg.times_ms();
    let mut pairs = Vec::new();
    let mut j = 0usize;
    for &p in pt {
        let shifted = p + lag_ms;
        while j < et.len() && et[j] < shifted - tolerance_ms {
            j += 1;
        }
        if j < et.len() && et[j] <= shifted + tolerance_ms {
            pairs.push((et[j], p));
            j += 1;
        }
    }
    MatchResult {
        lag_ms,
        n_correct: pairs.len(),
        n_ecg: et.len(),
        n_ppg: pt.len(),
        pairs,
    }
}

fn match_count(ppg: &[i64], ecg: &[i64], lag_ms: i64, tolerance_ms: i64) -> usize {
    match_count_residual(ppg, ecg, lag_ms, tolerance_ms).0
}

/// Match count plus the summed |residual| of the matched pairs (alignment
/// quality used to break lag-count ties).
fn match_count_residual(ppg: &[i64], ecg: &[i64], lag_ms: i64, tolerance_ms: i64) -> (usize, i64) {
    let mut count = 0;
    let mut residual = 0i64;
    let mut j = 0usize;
    for &p in ppg {
        let shifted = p + lag_ms;
        while j < ecg.len() && ecg[j] < shifted - tolerance_ms {
            j += 1;
        }
        if j < ecg.len() && ecg[j] <= shifted + tolerance_ms {
            count += 1;
            residual += (shifted - ecg[j]).abs();
            j += 1;
        }
    }
    (count, residual)
}

/// Lag search parameters.
#[derive(Debug, Clone, Copy)]
pub struct MatchingConfig {
    pub tolerance_ms: i64,
    pub lag_search_ms: i64,
    pub lag_step_ms: i64,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        Self {
            tolerance_ms: 150,
            lag_search_ms: 2000,
            lag_step_ms: 20,
        }
    }
}

/// Lag in `{-search, ..., +search}` (multiples of `step`) maximizing the
/// match count of the shifted PPG series against the ECG series. Because the
/// tolerance makes whole plateaus of lags share the maximum count, count ties
/// break toward the smallest summed |residual| of the matched pairs (so a
/// constructed shift is recovered exactly), then toward the smallest |lag|,
/// negative before positive.
pub fn best_lag(ppg: &BeatSeries, ecg: &BeatSeries, cfg: &MatchingConfig) -> Result<i64> {
    if ppg.is_empty() || ecg.is_empty() {
        return Err(Error::EmptyInput("lag search needs non-empty beat series"));
    }
    // (count desc, residual asc, |lag| asc, lag asc)
    let mut best: Option<(usize, i64, i64, i64)> = None;
    let mut lag = -cfg.lag_search_ms;
    while lag <= cfg.lag_search_ms {
        let (count, residual) =
            match_count_residual(ppg.times_ms(), ecg.times_ms(), lag, cfg.tolerance_ms);
        let key = (count, residual, lag.abs(), lag);
        let better = match best {
            None => true,
            Some((bc, br, babs, blag)) => {
                count > bc
                    || (count == bc
                        && (residual < br
                            || (residual == br
                                && (lag.abs() < babs || (lag.abs() == babs && lag < blag)))))
            }
        };
        if better {
            best = Some(key);
        }
        lag += cfg.lag_step_ms;
    }
    Ok(best.expect("at least one lag evaluated").3)
}

/// Sensitivity, positive predictive value, and F1, all on a 0-100 scale.
pub fn se_ppv_f1(m: &MatchResult) -> Result<(f64, f64, f64)> {
    if m.n_ecg == 0 || m.n_ppg == 0 {
        return Err(Error::UndefinedMetric(
            "Se/PPV need at least one beat on each side",
        ));
    }
    let se = m.n_correct as f64 / m.n_ecg as f64 * 100.0;
    let ppv = m.n_correct as f64 / m.n_ppg as f64 * 100.0;
    let f1 = if se + ppv > 0.0 {
        2.0 * ppv * se / (ppv + se)
    } else {
        0.0
    };
    Ok((se, ppv, f1))
}

/// Artifact rejection thresholds for IBI cleaning.
#[derive(Debug, Clone, Copy)]
pub struct ArtifactRule {
    pub min_ibi_ms: f64,
    pub max_ibi_ms: f64,
    /// Maximum allowed relative deviation from the window median.
    pub max_median_deviation: f64,
}

impl Default for ArtifactRule {
    fn default() -> Self {
        Self {
            min_ibi_ms: 300.0,
            max_ibi_ms: 2000.0,
            max_median_deviation: 0.25,
        }
    }
}

fn median_of(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Indices of IBIs kept by the artifact rule: absolute bounds first, then the
/// median-deviation rule iterated to a fixpoint (one pass is not idempotent;
/// iterating makes `clean(clean(x)) == clean(x)` hold by construction).
pub fn clean_ibis_indices(ibis: &[f64], rule: &ArtifactRule) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..ibis.len())
        .filter(|&i| ibis[i] >= rule.min_ibi_ms && ibis[i] <= rule.max_ibi_ms)
        .collect();
    loop {
        if kept.is_empty() {
            return kept;
        }
        let values: Vec<f64> = kept.iter().map(|&i| ibis[i]).collect();
        let med = median_of(&values);
        let before = kept.len();
        kept.retain(|&i| (ibis[i] - med).abs() <= rule.max_median_deviation * med);
        if kept.len() == before {
            return kept;
        }
    }
}

/// Cleaned IBI values, order preserved.
pub fn clean_ibis(ibis: &[f64], rule: &ArtifactRule) -> Vec<f64> {
    clean_ibis_indices(ibis, rule)
        .into_iter()
        .map(|i| ibis[i])
        .collect()
}

/// Root mean square of successive IBI differences.
pub fn rmssd(ibis: &[f64]) -> Result<f64> {
    if ibis.len() < 2 {
        return Err(Error::UndefinedMetric("RMSSD needs at least 2 IBIs"));
    }
    let ssd: f64 = ibis.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((ssd / (ibis.len() - 1) as f64).sqrt())
}

/// RMSSD over pairs that are adjacent in the *original* IBI sequence;
/// successive-difference pairs spanning a dropped IBI are invalidated.
fn rmssd_adjacent(ibis: &[f64], kept: &[usize]) -> Option<f64> {
    let mut ssd = 0.0;
    let mut n = 0usize;
    for w in kept.windows(2) {
        if w[1] == w[0] + 1 {
            ssd += (ibis[w[1]] - ibis[w[0]]).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some((ssd / n as f64).sqrt())
    }
}

/// Mean of absolute values.
pub fn mae(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("MAE of an empty list"));
    }
    Ok(values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64)
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(
            "correlation needs at least 3 pairs".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("correlation of a constant input"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Per-window accuracy record.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMetrics {
    pub window: Window,
    pub n_ppg: usize,
    pub n_ecg: usize,
    pub n_correct: usize,
    pub se: f64,
    pub ppv: f64,
    pub f1: f64,
    pub mean_ibi_ms: f64,
    pub rmssd_ms: f64,
    pub ref_mean_ibi_ms: f64,
    pub ref_rmssd_ms: f64,
    pub abs_err_ibi_ms: f64,
    pub abs_err_rmssd_ms: f64,
    pub motion_auc: Option<f64>,
    pub valid: bool,
}

/// Windowed-metric configuration.
#[derive(Debug, Clone)]
pub struct WindowConfig {
    pub tolerance_ms: i64,
    pub artifact: ArtifactRule,
    /// A window is valid only when both sides keep *more than* this many
    /// artifact-free beats.
    pub min_valid_beats: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            tolerance_ms: 150,
            artifact: ArtifactRule::default(),
            min_valid_beats: 10,
        }
    }
}

/// Per-window Se/PPV/F1 plus cleaned mean-IBI and RMSSD errors against the
/// ECG reference. `lag_ms` (from [`best_lag`]) is applied to the PPG series;
/// beats are assigned to windows by their post-lag timestamps.
pub fn window_metrics(
    ppg: &BeatSeries,
    ecg: &BeatSeries,
    lag_ms: i64,
    windows: &[Window],
    cfg: &WindowConfig,
) -> Vec<SegmentMetrics> {
    let shifted = ppg.shifted(lag_ms);
    windows
        .iter()
        .map(|&window| {
            let pw = shifted.in_range(window.start_ms, window.end_ms());
            let ew = ecg.in_range(window.start_ms, window.end_ms());
            let n_correct = match_count(pw, ew, 0, cfg.tolerance_ms);
            let (se, ppv, f1) = if !pw.is_empty() && !ew.is_empty() {
                let se = n_correct as f64 / ew.len() as f64 * 100.0;
                let ppv = n_correct as f64 / pw.len() as f64 * 100.0;
                let f1 = if se + ppv > 0.0 {
                    2.0 * ppv * se / (ppv + se)
                } else {
                    0.0
                };
                (se, ppv, f1)
            } else {
                (0.0, 0.0, 0.0)
            };

            let side = |beats: &[i64]| -> (usize, Option<(f64, f64)>) {
                let ibis: Vec<f64> = beats.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
                let kept = clean_ibis_indices(&ibis, &cfg.artifact);
                if kept.is_empty() {
                    return (0, None);
                }
                let n_beats = kept.len() + 1;
                let mean = kept.iter().map(|&i| ibis[i]).sum::<f64>() / kept.len() as f64;
                match rmssd_adjacent(&ibis, &kept) {
                    Some(r) => (n_beats, Some((mean, r))),
                    None => (n_beats, None),
                }
            };
            let (np_valid, p_stats) = side(pw);
            let (ne_valid, e_stats) = side(ew);
            let valid = np_valid > cfg.min_valid_beats
                && ne_valid > cfg.min_valid_beats
                && p_stats.is_some()
                && e_stats.is_some();

            let (mean_ibi, rmssd_v) = p_stats.unwrap_or((f64::NAN, f64::NAN));
            let (ref_mean_ibi, ref_rmssd) = e_stats.unwrap_or((f64::NAN, f64::NAN));
            SegmentMetrics {
                window,
                n_ppg: pw.len(),
                n_ecg: ew.len(),
                n_correct,
                se,
                ppv,
                f1,
                mean_ibi_ms: mean_ibi,
                rmssd_ms: rmssd_v,
                ref_mean_ibi_ms: ref_mean_ibi,
                ref_rmssd_ms: ref_rmssd,
                abs_err_ibi_ms: (mean_ibi - ref_mean_ibi).abs(),
                abs_err_rmssd_ms: (rmssd_v - ref_rmssd).abs(),
                motion_auc: None,
                valid,
            }
        })
        .collect()
}

/// Scope-level aggregate over the valid windows of one recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowAggregate {
    pub mean_f1: f64,
    pub mae_ibi_ms: f64,
    pub mae_rmssd_ms: f64,
    pub n_valid: usize,
}

/// Mean F1 / MAE IBI / MAE RMSSD over valid windows; `None` when no window
/// is valid.
pub fn aggregate_windows(metrics: &[SegmentMetrics]) -> Option<WindowAggregate> {
    let valid: Vec<&SegmentMetrics> = metrics.iter().filter(|m| m.valid).collect();
    if valid.is_empty() {
        return None;
    }
    let n = valid.len() as f64;
    Some(WindowAggregate {
        mean_f1: valid.iter().map(|m| m.f1).sum::<f64>() / n,
        mae_ibi_ms: valid.iter().map(|m| m.abs_err_ibi_ms).sum::<f64>() / n,
        mae_rmssd_ms: valid.iter().map(|m| m.abs_err_rmssd_ms).sum::<f64>() / n,
        n_valid: valid.len(),
    })
}

/// Motion-metric parameters (simplified MIMS-like variant).
#[derive(Debug, Clone, Copy)]
pub struct MotionConfig {
    pub resample_fs: f64,
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            resample_fs: 100.0,
            low_hz: 0.2,
            high_hz: 5.0,
            order: 4,
        }
    }
}

/// MIMS-like movement summary for one window: per axis, resample to the
/// motion rate, Butterworth band-pass (zero-phase), rectify, and integrate
/// (trapezoid, seconds); the result is the sum over the three axes.
pub fn motion_auc(axes: [&Signal; 3], window: &Window, cfg: &MotionConfig) -> Result<f64> {
    let fs = axes[0].fs();
    let len = axes[0].len();
    for axis in &axes[1..] {
        if axis.fs() != fs || axis.len() != len {
            return Err(Error::InvalidInput(
                "accelerometer axes must share sampling rate and length".into(),
            ));
        }
    }
    let spec = FilterSpec::butterworth(cfg.order, cfg.low_hz, cfg.high_hz);
    let cascade = design_bandpass(&spec, cfg.resample_fs)?;
    let mut total = 0.0;
    for axis in axes {
        let r = resample(axis, cfg.resample_fs)?;
        let filtered = apply_zero_phase(&cascade, &r)?;
        let y = filtered.samples();
        let dt = 1.0 / cfg.resample_fs;
        // sample indices covering [start, end)
        let lo = ((window.start_ms as f64 / 1000.0) * cfg.resample_fs).ceil() as usize;
        let hi = (((window.end_ms() as f64 / 1000.0) * cfg.resample_fs).ceil() as usize)
            .min(y.len());
        if hi.saturating_sub(lo) < 2 {
            continue;
        }
        let mut acc = 0.0;
        for i in lo..hi - 1 {
            acc += 0.5 * (y[i].abs() + y[i + 1].abs()) * dt;
        }
        total += acc;
    }
    Ok(total)
}

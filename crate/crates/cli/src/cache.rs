//! Disk cache for grid evaluations: one CSV per recording, keyed by a
//! content hash of the recording and the evaluation parameters, so sweeps
//! resume cheaply and stale caches can never be confused for fresh ones.
//! Floats are stored as bit patterns, keeping cached and freshly computed
//! report outputs byte-identical.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use pulseband_core::optimize::{EvalConfig, Recording, RecordingSummary};

use crate::errors::Result;
use crate::io::atomic_write;

/// Content hash of one recording plus the evaluation parameters that affect
/// its summaries.
pub fn recording_hash(rec: &Recording, cfg: &EvalConfig) -> String {
    let mut h = Sha256::new();
    h.update(rec.ppg.fs().to_bits().to_le_bytes());
    h.update(rec.ppg_offset_ms.to_le_bytes());
    for v in rec.ppg.samples() {
        h.update(v.to_bits().to_le_bytes());
    }
    for t in rec.ecg_beats.times_ms() {
        h.update(t.to_le_bytes());
    }
    h.update(cfg.ppg_filter_order.to_le_bytes());
    h.update(cfg.ppg_stopband_atten_db.to_bits().to_le_bytes());
    h.update(cfg.window_ms.to_le_bytes());
    h.update(cfg.matching.tolerance_ms.to_le_bytes());
    h.update(cfg.matching.lag_search_ms.to_le_bytes());
    h.update(cfg.matching.lag_step_ms.to_le_bytes());
    h.update(cfg.window.min_valid_beats.to_le_bytes());
    h.update(cfg.window.artifact.min_ibi_ms.to_bits().to_le_bytes());
    h.update(cfg.window.artifact.max_ibi_ms.to_bits().to_le_bytes());
    h.update(
        cfg.window
            .artifact
            .max_median_deviation
            .to_bits()
            .to_le_bytes(),
    );
    h.update(cfg.detector.ma_window_ms.to_bits().to_le_bytes());
    h.update(cfg.detector.min_bpm.to_bits().to_le_bytes());
    h.update(cfg.detector.max_bpm.to_bits().to_le_bytes());
    format!("{:x}", h.finalize())
}

fn cache_file(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("{hash}.csv"))
}

/// Load cached summaries for one recording; absent or unreadable cache files
/// just mean an empty cache.
pub fn load(dir: &Path, hash: &str) -> HashMap<(u16, u16), RecordingSummary> {
    let mut out = HashMap::new();
    let Ok(text) = std::fs::read_to_string(cache_file(dir, hash)) else {
        return out;
    };
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            continue;
        }
        let parse_u16 = |s: &str| s.parse::<u16>().ok();
        let parse_bits = |s: &str| u64::from_str_radix(s, 16).ok().map(f64::from_bits);
        let (Some(lo), Some(hi)) = (parse_u16(fields[0]), parse_u16(fields[1])) else {
            continue;
        };
        let (Some(f1), Some(ibi), Some(rmssd)) = (
            parse_bits(fields[2]),
            parse_bits(fields[3]),
            parse_bits(fields[4]),
        ) else {
            continue;
        };
        let Some(n_valid) = fields[5].parse::<usize>().ok() else {
            continue;
        };
        out.insert(
            (lo, hi),
            RecordingSummary {
                mean_f1: f1,
                mae_ibi_ms: ibi,
                mae_rmssd_ms: rmssd,
                n_valid,
            },
        );
    }
    out
}

/// Persist the summaries for one recording (full rewrite, sorted keys).
pub fn store(
    dir: &Path,
    hash: &str,
    entries: &HashMap<(u16, u16), RecordingSummary>,
) -> Result<()> {
    let mut keys: Vec<&(u16, u16)> = entries.keys().collect();
    keys.sort();
    let mut out = String::from("low_dhz,high_dhz,mean_f1_bits,mae_ibi_bits,mae_rmssd_bits,n_valid\n");
    for key in keys {
        let s = &entries[key];
        out.push_str(&format!(
            "{},{},{:016x},{:016x},{:016x},{}\n",
            key.0,
            key.1,
            s.mean_f1.to_bits(),
            s.mae_ibi_ms.to_bits(),
            s.mae_rmssd_ms.to_bits(),
            s.n_valid
        ));
    }
    atomic_write(&cache_file(dir, hash), out.as_bytes())
}

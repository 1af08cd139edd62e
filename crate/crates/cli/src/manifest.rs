//! Dataset manifest: a TOML file listing the recordings and where their
//! channel files live. Paths are relative to the manifest location.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use pulseband_core::beat::detect_ecg_beats;
use pulseband_core::filter::{apply_zero_phase, design_bandpass, FilterSpec};
use pulseband_core::optimize::{Dataset, Recording};
use pulseband_core::{BeatSource, ChannelRole};

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecording {
    pub participant: String,
    pub task: String,
    pub ppg: String,
    #[serde(default = "default_format")]
    pub ppg_format: String,
    pub ppg_fs: Option<f64>,
    /// Either an ECG signal file (beats are detected) ...
    pub ecg: Option<String>,
    #[serde(default = "default_format")]
    pub ecg_format: String,
    pub ecg_fs: Option<f64>,
    /// ... or a precomputed beats CSV.
    pub ecg_beats: Option<String>,
    pub acc: Option<String>,
    #[serde(default = "default_format")]
    pub acc_format: String,
    pub acc_fs: Option<f64>,
}

fn default_format() -> String {
    "generic".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(rename = "recording", default)]
    pub recordings: Vec<ManifestRecording>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut manifest: DatasetManifest =
            toml::from_str(&text).map_err(|e| CliError::Validation {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        manifest.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        manifest.validate(path)?;
        Ok(manifest)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let mut seen = BTreeSet::new();
        for rec in &self.recordings {
            let key = (rec.participant.clone(), rec.task.clone());
            if !seen.insert(key) {
                return Err(CliError::Validation {
                    path: path.to_path_buf(),
                    message: format!(
                        "duplicate (participant, task) pair ({}, {})",
                        rec.participant, rec.task
                    ),
                });
            }
            match (&rec.ecg, &rec.ecg_beats) {
                (None, None) => {
                    return Err(CliError::Validation {
                        path: path.to_path_buf(),
                        message: format!(
                            "({}, {}): needs either ecg or ecg_beats",
                            rec.participant, rec.task
                        ),
                    })
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Validation {
                        path: path.to_path_buf(),
                        message: format!(
                            "({}, {}): ecg and ecg_beats are mutually exclusive",
                            rec.participant, rec.task
                        ),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Ingest every recording, detect ECG beats where needed, and build the
    /// in-memory dataset. Any failure aborts with a per-file error listing.
    pub fn load_dataset(&self, config: &RunConfig) -> Result<Dataset> {
        let mut recordings = Vec::with_capacity(self.recordings.len());
        let mut failures: Vec<String> = Vec::new();
        for rec in &self.recordings {
            match self.load_recording(rec, config) {
                Ok(r) => recordings.push(r),
                Err(e) => failures.push(format!("({}, {}): {e}", rec.participant, rec.task)),
            }
        }
        if !failures.is_empty() {
            return Err(CliError::IngestFailures(failures));
        }
        recordings.sort_by(|a, b| {
            (a.participant.clone(), a.task.clone()).cmp(&(b.participant.clone(), b.task.clone()))
        });
        Ok(Dataset { recordings })
    }

    fn load_recording(&self, rec: &ManifestRecording, config: &RunConfig) -> Result<Recording> {
        let ppg_path = self.resolve(&rec.ppg);
        let ppg = match rec.ppg_format.as_str() {
            "e4" => {
                let mut signals = io::read_e4_csv(&ppg_path, ChannelRole::Ppg)?;
                if signals.len() != 1 {
                    return Err(CliError::Validation {
                        path: ppg_path,
                        message: "expected a single-column PPG file".into(),
                    });
                }
                signals.remove(0)
            }
            "generic" => {
                let fs = rec.ppg_fs.ok_or_else(|| CliError::Validation {
                    path: ppg_path.clone(),
                    message: "generic PPG needs ppg_fs in the manifest".into(),
                })?;
                io::read_generic_csv(&ppg_path, fs, ChannelRole::Ppg)?
            }
            other => {
                return Err(CliError::InvalidArguments(format!(
                    "unknown ppg_format {other:?}"
                )))
            }
        };

        let (ecg_beats, ecg_start_ms) = if let Some(beats_rel) = &rec.ecg_beats {
            let beats_path = self.resolve(beats_rel);
            // beats files carry recording-relative times; the frame starts
            // where the PPG starts
            (
                io::read_beats_csv(&beats_path, BeatSource::Ecg)?,
                ppg.start_time_ms(),
            )
        } else {
            let ecg_rel = rec.ecg.as_ref().expect("validated");
            let ecg_path = self.resolve(ecg_rel);
            let ecg = match rec.ecg_format.as_str() {
                "e4" => {
                    let mut signals = io::read_e4_csv(&ecg_path, ChannelRole::Ecg)?;
                    if signals.len() != 1 {
                        return Err(CliError::Validation {
                            path: ecg_path,
                            message: "expected a single-column ECG file".into(),
                        });
                    }
                    signals.remove(0)
                }
                "generic" => {
                    let fs = rec.ecg_fs.ok_or_else(|| CliError::Validation {
                        path: ecg_path.clone(),
                        message: "generic ECG needs ecg_fs in the manifest".into(),
                    })?;
                    io::read_generic_csv(&ecg_path, fs, ChannelRole::Ecg)?
                }
                other => {
                    return Err(CliError::InvalidArguments(format!(
                        "unknown ecg_format {other:?}"
                    )))
                }
            };
            let spec = FilterSpec::elliptic(
                config.filter.ecg_order,
                config.filter.ecg_low_hz,
                config.filter.ecg_high_hz,
                config.filter.ecg_passband_ripple_db,
                config.filter.ecg_stopband_atten_db,
            );
            let cascade = design_bandpass(&spec, ecg.fs())?;
            let filtered = apply_zero_phase(&cascade, &ecg)?;
            let beats = detect_ecg_beats(&filtered, &config.ecg_detector())?;
            (beats, ecg.start_time_ms())
        };

        let acc = match &rec.acc {
            None => None,
            Some(acc_rel) => {
                let acc_path = self.resolve(acc_rel);
                let axes = match rec.acc_format.as_str() {
                    "e4" => {
                        let signals = io::read_e4_csv(&acc_path, ChannelRole::AccX)?;
                        let mut it = signals.into_iter();
                        match (it.next(), it.next(), it.next()) {
                            (Some(x), Some(y), Some(z)) => [x, y, z],
                            _ => {
                                return Err(CliError::Validation {
                                    path: acc_path,
                                    message: "expected a three-column ACC file".into(),
                                })
                            }
                        }
                    }
                    "generic" => {
                        let fs = rec.acc_fs.ok_or_else(|| CliError::Validation {
                            path: acc_path.clone(),
                            message: "generic ACC needs acc_fs in the manifest".into(),
                        })?;
                        io::read_generic_acc_csv(&acc_path, fs)?
                    }
                    other => {
                        return Err(CliError::InvalidArguments(format!(
                            "unknown acc_format {other:?}"
                        )))
                    }
                };
                Some(axes)
            }
        };

        Ok(Recording {
            participant: rec.participant.clone(),
            task: rec.task.clone(),
            ppg_offset_ms: ppg.start_time_ms() - ecg_start_ms,
            ppg,
            ecg_beats,
            acc,
        })
    }
}

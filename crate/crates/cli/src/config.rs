//! Run configuration: one TOML file (flat keys plus per-topic sections).
//! Every tunable constant from the processing modules surfaces here with its
//! default; an absent file means all defaults.

use std::path::Path;

use serde::Deserialize;

use pulseband_core::beat::{EcgDetectorConfig, PpgDetectorConfig};
use pulseband_core::metrics::{ArtifactRule, MatchingConfig, MotionConfig, WindowConfig};
use pulseband_core::optimize::{CutoffBounds, EvalConfig, Nsga2Config};
use pulseband_core::stats::CohensDVariant;

use crate::errors::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub window_ms: i64,
    /// Scopes to run; "base" always runs and need not be listed.
    pub scopes: Vec<String>,
    pub filter: FilterSection,
    pub detector: DetectorSection,
    pub matching: MatchingSection,
    pub artifacts: ArtifactSection,
    pub bounds: BoundsSection,
    pub nsga2: Nsga2Section,
    pub stats: StatsSection,
    pub motion: MotionSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            window_ms: 60_000,
            scopes: vec!["global".into(), "per_person_task".into()],
            filter: FilterSection::default(),
            detector: DetectorSection::default(),
            matching: MatchingSection::default(),
            artifacts: ArtifactSection::default(),
            bounds: BoundsSection::default(),
            nsga2: Nsga2Section::default(),
            stats: StatsSection::default(),
            motion: MotionSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    /// PPG filter (Chebyshev-II; cutoffs are stopband edges).
    pub ppg_order: usize,
    pub ppg_stopband_atten_db: f64,
    /// Fixed baseline cutoffs.
    pub base_low_hz: f64,
    pub base_high_hz: f64,
    /// ECG reference filter (elliptic; cutoffs are passband edges).
    pub ecg_order: usize,
    pub ecg_low_hz: f64,
    pub ecg_high_hz: f64,
    pub ecg_passband_ripple_db: f64,
    pub ecg_stopband_atten_db: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            ppg_order: 4,
            ppg_stopband_atten_db: 40.0,
            base_low_hz: 0.5,
            base_high_hz: 4.0,
            ecg_order: 4,
            ecg_low_hz: 1.0,
            ecg_high_hz: 15.0,
            ecg_passband_ripple_db: 1.0,
            ecg_stopband_atten_db: 40.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub ecg_smoothing_ms: f64,
    pub ecg_refine_ms: f64,
    pub ecg_refractory_ms: f64,
    pub ppg_ma_window_ms: f64,
    pub min_bpm: f64,
    pub max_bpm: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let ecg = EcgDetectorConfig::default();
        let ppg = PpgDetectorConfig::default();
        Self {
            ecg_smoothing_ms: ecg.smoothing_ms,
            ecg_refine_ms: ecg.refine_ms,
            ecg_refractory_ms: ecg.refractory_ms,
            ppg_ma_window_ms: ppg.ma_window_ms,
            min_bpm: ppg.min_bpm,
            max_bpm: ppg.max_bpm,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchingSection {
    pub tolerance_ms: i64,
    pub lag_search_ms: i64,
    pub lag_step_ms: i64,
}

impl Default for MatchingSection {
    fn default() -> Self {
        let m = MatchingConfig::default();
        Self {
            tolerance_ms: m.tolerance_ms,
            lag_search_ms: m.lag_search_ms,
            lag_step_ms: m.lag_step_ms,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArtifactSection {
    pub min_ibi_ms: f64,
    pub max_ibi_ms: f64,
    pub max_median_deviation: f64,
    /// A window needs more than this many artifact-free beats on both sides.
    pub min_valid_beats: usize,
}

impl Default for ArtifactSection {
    fn default() -> Self {
        let a = ArtifactRule::default();
        Self {
            min_ibi_ms: a.min_ibi_ms,
            max_ibi_ms: a.max_ibi_ms,
            max_median_deviation: a.max_median_deviation,
            min_valid_beats: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub f_low: [f64; 2],
    pub f_high: [f64; 2],
    pub grid_step_hz: f64,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            f_low: [0.4, 1.7],
            f_high: [1.2, 5.0],
            grid_step_hz: 0.1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Nsga2Section {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub sbx_eta: f64,
    pub mutation_prob: f64,
    pub mutation_eta: f64,
}

impl Default for Nsga2Section {
    fn default() -> Self {
        let n = Nsga2Config::default();
        Self {
            population: n.population,
            generations: n.generations,
            crossover_prob: n.crossover_prob,
            sbx_eta: n.sbx_eta,
            mutation_prob: n.mutation_prob,
            mutation_eta: n.mutation_eta,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsSection {
    pub alpha: f64,
    /// "paired" (default) or "pooled".
    pub cohens_d: String,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            cohens_d: "paired".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionSection {
    pub resample_fs: f64,
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for MotionSection {
    fn default() -> Self {
        let m = MotionConfig::default();
        Self {
            resample_fs: m.resample_fs,
            low_hz: m.low_hz,
            high_hz: m.high_hz,
            order: m.order,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Validation {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for scope in &self.scopes {
            if !matches!(scope.as_str(), "base" | "global" | "per_person_task") {
                return Err(CliError::InvalidArguments(format!(
                    "unknown scope {scope:?} (expected base, global, per_person_task)"
                )));
            }
        }
        if !matches!(self.stats.cohens_d.as_str(), "paired" | "pooled") {
            return Err(CliError::InvalidArguments(format!(
                "unknown cohens_d variant {:?} (expected paired or pooled)",
                self.stats.cohens_d
            )));
        }
        if self.window_ms <= 0 {
            return Err(CliError::InvalidArguments(
                "window_ms must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn run_global(&self) -> bool {
        self.scopes.iter().any(|s| s == "global")
    }

    pub fn run_per_person_task(&self) -> bool {
        self.scopes.iter().any(|s| s == "per_person_task")
    }

    pub fn ppg_detector(&self) -> PpgDetectorConfig {
        PpgDetectorConfig {
            ma_window_ms: self.detector.ppg_ma_window_ms,
            min_bpm: self.detector.min_bpm,
            max_bpm: self.detector.max_bpm,
            ..PpgDetectorConfig::default()
        }
    }

    pub fn ecg_detector(&self) -> EcgDetectorConfig {
        EcgDetectorConfig {
            smoothing_ms: self.detector.ecg_smoothing_ms,
            refine_ms: self.detector.ecg_refine_ms,
            refractory_ms: self.detector.ecg_refractory_ms,
            ..EcgDetectorConfig::default()
        }
    }

    pub fn artifact_rule(&self) -> ArtifactRule {
        ArtifactRule {
            min_ibi_ms: self.artifacts.min_ibi_ms,
            max_ibi_ms: self.artifacts.max_ibi_ms,
            max_median_deviation: self.artifacts.max_median_deviation,
        }
    }

    pub fn matching_config(&self) -> MatchingConfig {
        MatchingConfig {
            tolerance_ms: self.matching.tolerance_ms,
            lag_search_ms: self.matching.lag_search_ms,
            lag_step_ms: self.matching.lag_step_ms,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            ppg_filter_order: self.filter.ppg_order,
            ppg_stopband_atten_db: self.filter.ppg_stopband_atten_db,
            detector: self.ppg_detector(),
            matching: self.matching_config(),
            window: WindowConfig {
                tolerance_ms: self.matching.tolerance_ms,
                artifact: self.artifact_rule(),
                min_valid_beats: self.artifacts.min_valid_beats,
            },
            window_ms: self.window_ms,
        }
    }

    pub fn cutoff_bounds(&self) -> CutoffBounds {
        CutoffBounds {
            f_low: (self.bounds.f_low[0], self.bounds.f_low[1]),
            f_high: (self.bounds.f_high[0], self.bounds.f_high[1]),
        }
    }

    pub fn nsga2_config(&self, seed: u64) -> Nsga2Config {
        Nsga2Config {
            population: self.nsga2.population,
            generations: self.nsga2.generations,
            crossover_prob: self.nsga2.crossover_prob,
            sbx_eta: self.nsga2.sbx_eta,
            mutation_prob: self.nsga2.mutation_prob,
            mutation_eta: self.nsga2.mutation_eta,
            seed,
        }
    }

    pub fn motion_config(&self) -> MotionConfig {
        MotionConfig {
            resample_fs: self.motion.resample_fs,
            low_hz: self.motion.low_hz,
            high_hz: self.motion.high_hz,
            order: self.motion.order,
        }
    }

    pub fn cohens_d_variant(&self) -> CohensDVariant {
        match self.stats.cohens_d.as_str() {
            "pooled" => CohensDVariant::Pooled,
            _ => CohensDVariant::Paired,
        }
    }
}

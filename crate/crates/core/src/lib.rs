//! Core algorithms for band-pass cutoff optimization of PPG beat detection:
//! waveform handling, IIR filter design and zero-phase application, ECG/PPG
//! beat detectors, beat-matching accuracy metrics, NSGA-II multi-objective
//! cutoff search, and the statistics used to compare filter conditions.

pub mod beat;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod optimize;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod synth;

pub use beat::{BeatSeries, BeatSource};
pub use error::{Error, Result};
pub use filter::{design_bandpass, apply_zero_phase, FilterFamily, FilterSpec, SosCascade};
pub use metrics::{MatchResult, SegmentMetrics};
pub use optimize::{CutoffPair, Dataset, ObjectiveTriple, OptimizationScope, Recording};
pub use signal::{ChannelRole, Signal, Window};
